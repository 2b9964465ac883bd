//! File outputs: summary/aggregate CSVs, per-figure data files, the fit
//! report and an optional dependency-free SVG of the balance surface.
//!
//! Every writer emits UTF-8 with LF line endings and formats floating-point
//! values to 6 significant digits, so identical inputs produce byte-identical
//! files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::{HistogramSnapshot, RunResult, TraceRow, DAYS_PER_YEAR};
use crate::error::{Error, Result};
use crate::fit::{
    fit_gauss_surface, fit_gauss_surface_anchored, fit_linear, ridge_products, GaussSurfaceFit,
    LinearFit, RidgePoint,
};
use crate::metrics::{CellStats, SweepRow, SweepTable};

pub const SUMMARY_HEADER: &str = "k_th,c_th,seed,k_med,u_med,g_k,g_u,balance";
pub const REFERENCE_HEADER: &str = "k_th,c_th,k_med,u_med,g_k,g_u,balance";

/// Formats with 6 significant digits in plain positional notation.
pub fn fmt_sig(v: f64) -> String {
    const SIG: i32 = 6;
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (SIG - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Summary CSV: one row per `(k_th, c_th, seed)` run.
pub fn write_summary_csv(table: &SweepTable, path: &Path) -> Result<()> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_sig(r.k_th),
            fmt_sig(r.c_th),
            r.seed,
            fmt_sig(r.k_med),
            fmt_sig(r.u_med),
            fmt_sig(r.g_k),
            fmt_sig(r.g_u),
            fmt_sig(r.balance),
        );
    }
    write_file(path, &out)
}

/// Companion aggregate CSV: per-cell seed means and standard deviations.
pub fn write_agg_csv(cells: &[CellStats], path: &Path) -> Result<()> {
    let mut out = String::from(
        "k_th,c_th,n_seeds,k_med_mean,k_med_std,u_med_mean,u_med_std,\
         g_k_mean,g_k_std,g_u_mean,g_u_std,balance_mean,balance_std",
    );
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(c.k_th),
            fmt_sig(c.c_th),
            c.n_seeds,
            fmt_sig(c.k_med_mean),
            fmt_sig(c.k_med_std),
            fmt_sig(c.u_med_mean),
            fmt_sig(c.u_med_std),
            fmt_sig(c.g_k_mean),
            fmt_sig(c.g_k_std),
            fmt_sig(c.g_u_mean),
            fmt_sig(c.g_u_std),
            fmt_sig(c.balance_mean),
            fmt_sig(c.balance_std),
        );
    }
    write_file(path, &out)
}

fn parse_f64(field: &str, path: &Path, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line,
        reason: format!("`{field}` is not a number"),
    })
}

/// Reads a summary CSV back into a table.
pub fn read_summary_csv(path: &Path) -> Result<SweepTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == SUMMARY_HEADER => {}
        other => {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                reason: format!(
                    "expected header `{SUMMARY_HEADER}`, got `{}`",
                    other.map(|(_, h)| h).unwrap_or_default()
                ),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: lineno,
                reason: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        rows.push(SweepRow {
            k_th: parse_f64(fields[0], path, lineno)?,
            c_th: parse_f64(fields[1], path, lineno)?,
            seed: fields[2].trim().parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: lineno,
                reason: format!("`{}` is not a seed", fields[2]),
            })?,
            k_med: parse_f64(fields[3], path, lineno)?,
            u_med: parse_f64(fields[4], path, lineno)?,
            g_k: parse_f64(fields[5], path, lineno)?,
            g_u: parse_f64(fields[6], path, lineno)?,
            balance: parse_f64(fields[7], path, lineno)?,
        });
    }
    Ok(SweepTable::new(rows))
}

/// Reads a reference table (no seed column, one row per cell) as a table
/// with seed 0.
pub fn read_reference_csv(path: &Path) -> Result<SweepTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == REFERENCE_HEADER => {}
        other => {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                reason: format!(
                    "expected header `{REFERENCE_HEADER}`, got `{}`",
                    other.map(|(_, h)| h).unwrap_or_default()
                ),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: lineno,
                reason: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        rows.push(SweepRow {
            k_th: parse_f64(fields[0], path, lineno)?,
            c_th: parse_f64(fields[1], path, lineno)?,
            seed: 0,
            k_med: parse_f64(fields[2], path, lineno)?,
            u_med: parse_f64(fields[3], path, lineno)?,
            g_k: parse_f64(fields[4], path, lineno)?,
            g_u: parse_f64(fields[5], path, lineno)?,
            balance: parse_f64(fields[6], path, lineno)?,
        });
    }
    Ok(SweepTable::new(rows))
}

/// Confirms each row's balance column equals `u_med/g_k` within `tol`
/// (reference tables are rounded at the source).
pub fn verify_reference_balance(table: &SweepTable, tol: f64) -> Result<()> {
    for r in &table.rows {
        let expect = r.u_med / r.g_k;
        if (expect - r.balance).abs() > tol {
            return Err(Error::Degenerate {
                op: "verify_reference_balance",
                reason: format!(
                    "row (k_th = {}, c_th = {}): balance column {} vs recomputed {expect:.4}",
                    r.k_th, r.c_th, r.balance
                ),
            });
        }
    }
    Ok(())
}

/// Per-figure surface files: `(k_th, c_th, value)` per cell for each metric.
pub fn write_surface_csvs(cells: &[CellStats], dir: &Path) -> Result<Vec<PathBuf>> {
    let metrics: [(&str, fn(&CellStats) -> f64); 5] = [
        ("k_med", |c| c.k_med_mean),
        ("u_med", |c| c.u_med_mean),
        ("g_k", |c| c.g_k_mean),
        ("g_u", |c| c.g_u_mean),
        ("balance", |c| c.balance_mean),
    ];
    let mut written = Vec::new();
    for (name, get) in metrics {
        let mut out = String::from("k_th,c_th,value\n");
        for c in cells {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_sig(c.k_th),
                fmt_sig(c.c_th),
                fmt_sig(get(c))
            );
        }
        let path = dir.join(format!("surface_{name}.csv"));
        write_file(&path, &out)?;
        written.push(path);
    }
    Ok(written)
}

/// Inequality–utility scatter: per-cell mean `(g_k, u_med)`.
pub fn write_scatter_csv(cells: &[CellStats], path: &Path) -> Result<()> {
    let mut out = String::from("g_k,u_med\n");
    for c in cells {
        let _ = writeln!(out, "{},{}", fmt_sig(c.g_k_mean), fmt_sig(c.u_med_mean));
    }
    write_file(path, &out)
}

fn year_label(day: u32) -> String {
    let years = day as f64 / DAYS_PER_YEAR as f64;
    if (years - years.round()).abs() < 1e-9 {
        format!("{}", years.round() as i64)
    } else {
        format!("{years}")
    }
}

/// One file per quantity and snapshot time: `hist_<q>_t<years>.csv`.
pub fn write_histograms(snapshots: &[HistogramSnapshot], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for snap in snapshots {
        let label = year_label(snap.day);
        for (name, hist) in [("k", &snap.k), ("c", &snap.c), ("u", &snap.u)] {
            let mut out = String::from("bin_low,bin_high,count\n");
            for (idx, &count) in hist.counts.iter().enumerate() {
                let (lo, hi) = hist.bin_edges(idx);
                let _ = writeln!(out, "{},{},{count}", fmt_sig(lo), fmt_sig(hi));
            }
            let path = dir.join(format!("hist_{name}_t{label}.csv"));
            write_file(&path, &out)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// One file per traced agent: `trace_agent<id>.csv` with `(t_years, k, c, u)`.
pub fn write_traces(rows: &[TraceRow], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut ids: Vec<usize> = rows.iter().map(|r| r.agent_id).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut written = Vec::new();
    for id in ids {
        let mut out = String::from("t_years,k,c,u\n");
        for r in rows.iter().filter(|r| r.agent_id == id) {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_sig(r.day as f64 / DAYS_PER_YEAR as f64),
                fmt_sig(r.k),
                fmt_sig(r.c),
                fmt_sig(r.utility)
            );
        }
        let path = dir.join(format!("trace_agent{id}.csv"));
        write_file(&path, &out)?;
        written.push(path);
    }
    Ok(written)
}

/// Everything a single `run` invocation produces.
pub fn write_run_artifacts(result: &RunResult, row: &SweepRow, dir: &Path) -> Result<()> {
    let table = SweepTable::new(vec![*row]);
    write_summary_csv(&table, &dir.join("run_summary.csv"))?;
    if let Some(snapshots) = &result.histograms {
        write_histograms(snapshots, dir)?;
    }
    if let Some(rows) = &result.traces {
        write_traces(rows, dir)?;
    }
    Ok(())
}

/// Both Gauss-surface fits, the inequality–utility line and the ridge scan.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub gauss_free: GaussSurfaceFit,
    pub gauss_anchored: GaussSurfaceFit,
    pub linear: LinearFit,
    pub ridge: Vec<RidgePoint>,
}

/// Fits everything on the per-cell means. The ridge scan covers the three
/// smallest `k_th` columns (the lower-left of the surface).
pub fn build_fit_report(cells: &[CellStats]) -> Result<FitReport> {
    let gauss_free = fit_gauss_surface(cells)?;
    let gauss_anchored = fit_gauss_surface_anchored(cells)?;
    let points: Vec<(f64, f64)> = cells
        .iter()
        .map(|c| (c.g_k_mean, c.u_med_mean))
        .collect();
    let linear = fit_linear(&points)?;
    let mut k_columns: Vec<f64> = cells.iter().map(|c| c.k_th).collect();
    k_columns.sort_by(f64::total_cmp);
    k_columns.dedup();
    let hi = k_columns
        .get(2.min(k_columns.len().saturating_sub(1)))
        .copied()
        .unwrap_or(f64::INFINITY);
    let ridge = ridge_products(cells, (k_columns[0], hi));
    Ok(FitReport {
        gauss_free,
        gauss_anchored,
        linear,
        ridge,
    })
}

pub fn render_fit_report_text(report: &FitReport) -> String {
    let mut out = String::new();
    let gauss = |out: &mut String, name: &str, f: &GaussSurfaceFit| {
        let _ = writeln!(out, "[gauss surface: {name}]");
        let _ = writeln!(
            out,
            "  balance ~ A exp(-p (ln k_th - b)^2 - q (ln c_th - d)^2) + B"
        );
        let _ = writeln!(
            out,
            "  A = {:.4}, B = {:.4}, b = {:.4}, d = {:.4}, p = {:.4}, q = {:.4}",
            f.amplitude, f.offset, f.x_center, f.y_center, f.x_curvature, f.y_curvature
        );
        let _ = writeln!(
            out,
            "  R^2 = {:.4} (centered), {:.4} (uncentered), ss_res = {:.4e}, {} iterations",
            f.r_squared, f.r_squared_uncentered, f.ss_res, f.iterations
        );
    };
    gauss(&mut out, "free", &report.gauss_free);
    gauss(&mut out, "anchored peak, p = 1", &report.gauss_anchored);
    let _ = writeln!(out, "[linear: u_med ~ slope * g_k + intercept]");
    let _ = writeln!(
        out,
        "  slope = {:.4} (se {:.4}), intercept = {:.4}, p = {:.3e}, R^2 = {:.4}",
        report.linear.slope,
        report.linear.slope_std_err,
        report.linear.intercept,
        report.linear.p_value,
        report.linear.r_squared
    );
    let _ = writeln!(out, "[ridge: argmax-balance c_th per k_th column]");
    for r in &report.ridge {
        let _ = writeln!(
            out,
            "  k_th = {} -> c_th = {} (balance {:.1}), product = {:.2}",
            r.k_th, r.c_th, r.balance, r.product
        );
    }
    out
}

pub fn render_fit_report_csv(report: &FitReport) -> String {
    let mut out = String::from("metric,value\n");
    let mut kv = |k: &str, v: f64| {
        let _ = writeln!(out, "{k},{}", fmt_sig(v));
    };
    for (prefix, f) in [
        ("gauss_free", &report.gauss_free),
        ("gauss_anchored", &report.gauss_anchored),
    ] {
        kv(&format!("{prefix}_amplitude"), f.amplitude);
        kv(&format!("{prefix}_offset"), f.offset);
        kv(&format!("{prefix}_x_center"), f.x_center);
        kv(&format!("{prefix}_y_center"), f.y_center);
        kv(&format!("{prefix}_x_curvature"), f.x_curvature);
        kv(&format!("{prefix}_y_curvature"), f.y_curvature);
        kv(&format!("{prefix}_r_squared"), f.r_squared);
        kv(
            &format!("{prefix}_r_squared_uncentered"),
            f.r_squared_uncentered,
        );
    }
    kv("linear_slope", report.linear.slope);
    kv("linear_intercept", report.linear.intercept);
    kv("linear_p_value", report.linear.p_value);
    kv("linear_r_squared", report.linear.r_squared);
    for r in &report.ridge {
        let _ = writeln!(
            out,
            "ridge_product_k{},{}",
            fmt_sig(r.k_th),
            fmt_sig(r.product)
        );
    }
    out
}

pub fn write_fit_report(report: &FitReport, dir: &Path) -> Result<()> {
    write_file(&dir.join("fit_report.txt"), &render_fit_report_text(report))?;
    write_file(&dir.join("fit_report.csv"), &render_fit_report_csv(report))
}

/// Hand-written SVG heat map of the mean balance surface on the threshold
/// grid, peak cell marked with a cross.
pub fn write_balance_svg(cells: &[CellStats], path: &Path) -> Result<()> {
    let mut k_vals: Vec<f64> = cells.iter().map(|c| c.k_th).collect();
    k_vals.sort_by(f64::total_cmp);
    k_vals.dedup();
    let mut c_vals: Vec<f64> = cells.iter().map(|c| c.c_th).collect();
    c_vals.sort_by(f64::total_cmp);
    c_vals.dedup();

    let finite: Vec<f64> = cells
        .iter()
        .map(|c| c.balance_mean)
        .filter(|v| v.is_finite())
        .collect();
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(f64::MIN_POSITIVE);

    const CELL: f64 = 42.0;
    const MARGIN: f64 = 70.0;
    let width = MARGIN + CELL * k_vals.len() as f64 + 30.0;
    let height = MARGIN + CELL * c_vals.len() as f64 + 30.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14">balance index u_med/g_k</text>"#,
        MARGIN
    );

    let mut peak = (0usize, 0usize, f64::NEG_INFINITY);
    for c in cells {
        let Some(xi) = k_vals.iter().position(|&v| v == c.k_th) else {
            continue;
        };
        let Some(yi) = c_vals.iter().position(|&v| v == c.c_th) else {
            continue;
        };
        let v = c.balance_mean;
        if v > peak.2 {
            peak = (xi, yi, v);
        }
        let t = if v.is_finite() { (v - lo) / span } else { 1.0 };
        // two-stop blend, dark blue to warm yellow
        let r = (40.0 + 215.0 * t) as u8;
        let g = (45.0 + 170.0 * t) as u8;
        let b = (140.0 - 100.0 * t).max(0.0) as u8;
        let x = MARGIN + xi as f64 * CELL;
        // c_th grows upward
        let y = MARGIN + (c_vals.len() - 1 - yi) as f64 * CELL;
        let _ = writeln!(
            svg,
            r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({r},{g},{b})"><title>k_th={}, c_th={}, balance={:.1}</title></rect>"##,
            c.k_th, c.c_th, v
        );
    }

    // axis labels
    for (xi, k) in k_vals.iter().enumerate() {
        let x = MARGIN + xi as f64 * CELL + CELL / 2.0;
        let y = MARGIN + CELL * c_vals.len() as f64 + 16.0;
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="middle">{k}</text>"#
        );
    }
    for (yi, c) in c_vals.iter().enumerate() {
        let x = MARGIN - 8.0;
        let y = MARGIN + (c_vals.len() - 1 - yi) as f64 * CELL + CELL / 2.0 + 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end">{c}</text>"#
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">k_th</text>"#,
        MARGIN + CELL * k_vals.len() as f64 / 2.0,
        MARGIN + CELL * c_vals.len() as f64 + 30.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">c_th</text>"#,
        MARGIN + CELL * c_vals.len() as f64 / 2.0,
        MARGIN + CELL * c_vals.len() as f64 / 2.0
    );

    // peak cross
    let px = MARGIN + peak.0 as f64 * CELL + CELL / 2.0;
    let py = MARGIN + (c_vals.len() - 1 - peak.1) as f64 * CELL + CELL / 2.0;
    let _ = writeln!(
        svg,
        r#"<path d="M {} {} L {} {} M {} {} L {} {}" stroke="black" stroke-width="2"/>"#,
        px - 8.0,
        py - 8.0,
        px + 8.0,
        py + 8.0,
        px - 8.0,
        py + 8.0,
        px + 8.0,
        py - 8.0
    );
    let _ = writeln!(svg, "</svg>");
    write_file(path, &svg)
}
