//! Command-line driver: single runs, threshold sweeps, fits over existing
//! result tables and verification against the bundled reference table.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use moralecon_core::config::{parse_config, SweepConfig};
use moralecon_core::engine::{self, TraceConfig};
use moralecon_core::error::{Error, Result};
use moralecon_core::export;
use moralecon_core::interactions::MoralParams;
use moralecon_core::metrics::SweepRow;
use moralecon_core::sweep::run_sweep;

#[derive(Parser)]
#[command(
    name = "moralecon",
    about = "Agent-based wealth/utility simulator with redistribution and consumption thresholds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Path to a TOML config, or `baseline` for the bundled preset.
    #[arg(long, default_value = "baseline")]
    config: String,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a single (k_th, c_th, seed) cell.
    Run {
        #[command(flatten)]
        common: CommonOpts,

        /// Redistribution threshold.
        #[arg(long)]
        k_th: f64,

        /// Consumption threshold.
        #[arg(long)]
        c_th: f64,

        /// RNG seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,

        /// Agents to trace, e.g. `0,1,2`.
        #[arg(long, value_delimiter = ',')]
        trace_agents: Vec<usize>,

        /// Days between trace samples.
        #[arg(long, default_value_t = 365)]
        trace_cadence: u32,

        /// Histogram snapshot times in years, e.g. `1,30,100`.
        #[arg(long, value_delimiter = ',')]
        hist_times: Vec<f64>,

        /// Histogram bin count.
        #[arg(long, default_value_t = 50)]
        hist_bins: usize,
    },

    /// Run the full (k_th, c_th, seed) grid and export summary artifacts.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,

        /// Seeds overriding the config, e.g. `1,2,3`.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,

        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,

        /// Also write an SVG heat map of the balance surface.
        #[arg(long)]
        svg: bool,
    },

    /// Fit the balance surface and inequality-utility line on an existing
    /// summary CSV.
    Fit {
        /// Summary CSV produced by `sweep` (or `run`).
        #[arg(long)]
        csv: PathBuf,

        /// Output directory for the fit report.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },

    /// Check a reference table (k_th,c_th,k_med,u_med,g_k,g_u,balance):
    /// recompute the balance column and run the fits on it.
    #[command(name = "verify-table-s1")]
    VerifyTableS1 {
        /// Reference CSV, e.g. data/table_s1.csv.
        #[arg(long, default_value = "data/table_s1.csv")]
        csv: PathBuf,

        /// Optional directory for the fit report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(source: &str) -> Result<SweepConfig> {
    if source == "baseline" {
        Ok(SweepConfig::baseline())
    } else {
        parse_config(Path::new(source))
    }
}

fn cmd_run(
    common: &CommonOpts,
    k_th: f64,
    c_th: f64,
    seed: u64,
    trace: TraceConfig,
) -> Result<()> {
    let cfg = load_config(&common.config)?;
    let morals = MoralParams { k_th, c_th };
    morals.validate()?;
    let result = engine::run(
        cfg.economy_params()?,
        cfg.business_params(),
        cfg.redist_params(),
        morals,
        cfg.schedule(seed),
        &trace,
    )?;
    let row = SweepRow {
        k_th,
        c_th,
        seed,
        k_med: result.k_med,
        u_med: result.u_med,
        g_k: result.g_k,
        g_u: result.g_u,
        balance: result.balance,
    };
    export::write_run_artifacts(&result, &row, &common.out)?;
    println!(
        "cell (k_th = {k_th}, c_th = {c_th}, seed = {seed}): \
         k_med = {:.4}, u_med = {:.4}, g_k = {:.4}, g_u = {:.4}, balance = {:.4}",
        row.k_med, row.u_med, row.g_k, row.g_u, row.balance
    );
    println!("artifacts in {}", common.out.display());
    Ok(())
}

fn cmd_sweep(common: &CommonOpts, seeds: Vec<u64>, threads: usize, svg: bool) -> Result<()> {
    let mut cfg = load_config(&common.config)?;
    if !seeds.is_empty() {
        cfg.sweep.seeds = seeds;
    }
    let parallelism = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    };
    eprintln!(
        "sweep: {} cells x {} seeds on {parallelism} threads",
        cfg.cells().len(),
        cfg.sweep.seeds.len()
    );
    let (table, timing) = run_sweep(&cfg, parallelism)?;
    let mean_run = timing.per_run.iter().map(|r| r.3).sum::<f64>() / timing.per_run.len() as f64;
    eprintln!(
        "sweep finished in {:.1}s ({} runs, mean {:.2}s/run)",
        timing.total_seconds,
        timing.per_run.len(),
        mean_run
    );

    let cells = table.aggregate();
    let out = &common.out;
    if cfg.outputs.summary {
        export::write_summary_csv(&table, &out.join("summary.csv"))?;
    }
    if cfg.outputs.aggregate {
        export::write_agg_csv(&cells, &out.join("summary_agg.csv"))?;
    }
    if cfg.outputs.surfaces {
        export::write_surface_csvs(&cells, out)?;
    }
    if cfg.outputs.scatter {
        export::write_scatter_csv(&cells, &out.join("scatter_gk_umed.csv"))?;
    }
    if svg || cfg.outputs.svg {
        export::write_balance_svg(&cells, &out.join("balance_surface.svg"))?;
    }
    if cfg.outputs.fit_report {
        match export::build_fit_report(&cells) {
            Ok(report) => {
                export::write_fit_report(&report, out)?;
                print!("{}", export::render_fit_report_text(&report));
            }
            // small grids cannot support the surface fit; that is not a
            // sweep failure
            Err(Error::Degenerate { reason, .. }) => {
                eprintln!("fit report skipped: {reason}");
            }
            Err(other) => return Err(other),
        }
    }
    println!("artifacts in {}", out.display());
    Ok(())
}

fn cmd_fit(csv: &Path, out: &Path) -> Result<()> {
    let table = export::read_summary_csv(csv)?;
    let cells = table.aggregate();
    let report = export::build_fit_report(&cells)?;
    export::write_fit_report(&report, out)?;
    print!("{}", export::render_fit_report_text(&report));
    Ok(())
}

fn cmd_verify(csv: &Path, out: Option<&Path>) -> Result<()> {
    // column rounding (one decimal on u_med and balance, four on g_k)
    // propagates to just above 0.2 on some rows
    const BALANCE_TOL: f64 = 0.25;
    let table = export::read_reference_csv(csv)?;
    export::verify_reference_balance(&table, BALANCE_TOL)?;
    println!(
        "balance column of {} agrees with u_med/g_k to +/-{BALANCE_TOL} over {} rows",
        csv.display(),
        table.rows.len()
    );
    let cells = table.aggregate();
    let report = export::build_fit_report(&cells)?;
    print!("{}", export::render_fit_report_text(&report));
    if let Some(dir) = out {
        export::write_fit_report(&report, dir)?;
        println!("fit report in {}", dir.display());
    }
    Ok(())
}

fn real_main(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            common,
            k_th,
            c_th,
            seed,
            trace_agents,
            trace_cadence,
            hist_times,
            hist_bins,
        } => {
            let trace = TraceConfig {
                agent_ids: trace_agents,
                cadence_days: trace_cadence,
                hist_times_years: hist_times,
                hist_bins,
            };
            cmd_run(&common, k_th, c_th, seed, trace)
        }
        Command::Sweep {
            common,
            seeds,
            threads,
            svg,
        } => cmd_sweep(&common, seeds, threads, svg),
        Command::Fit { csv, out } => cmd_fit(&csv, &out),
        Command::VerifyTableS1 { csv, out } => cmd_verify(&csv, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors; anything else is bad usage
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
