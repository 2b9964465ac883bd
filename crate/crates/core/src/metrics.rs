//! Inequality and location statistics plus the sweep-table container that
//! the export and fitting layers consume.

use crate::error::{Error, Result};

/// Gini index of a non-negative sample, computed from the ascending sort:
/// `2 Σ q·r_q / (n Σ r_q) − (n+1)/n` with 1-based ranks `q`. Lies in
/// `[0, (n−1)/n]`; ties cannot affect the value.
///
/// Evaluated in the algebraically equal offset form
/// `Σ (2q−n−1)(r_q − r_min) / (n Σ r_q)`, whose numerator cancels exactly
/// for an all-equal sample instead of leaving rounding residue.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Degenerate {
            op: "gini",
            reason: "empty input".to_string(),
        });
    }
    if let Some(&bad) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Degenerate {
            op: "gini",
            reason: format!("negative or non-finite value {bad}"),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate {
            op: "gini",
            reason: "all values are zero".to_string(),
        });
    }
    let base = sorted[0];
    let numerator: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| ((2 * (i + 1)) as f64 - n - 1.0) * (v - base))
        .sum();
    Ok(numerator / (n * total))
}

/// Median: middle element for odd length, mean of the two middle elements
/// for even length.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Degenerate {
            op: "median",
            reason: "empty input".to_string(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Balance index `u_med / g_k`. Errors on a perfectly equal population
/// (`g_k == 0`); exports print that case as an infinite sentinel.
pub fn balance_index(u_med: f64, g_k: f64) -> Result<f64> {
    if g_k == 0.0 {
        return Err(Error::Degenerate {
            op: "balance_index",
            reason: "Gini index is zero, balance is undefined/infinite".to_string(),
        });
    }
    Ok(u_med / g_k)
}

/// One sweep run: the moral-threshold pair, the seed and the summary
/// metrics of the finished population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub k_th: f64,
    pub c_th: f64,
    pub seed: u64,
    pub k_med: f64,
    pub u_med: f64,
    pub g_k: f64,
    pub g_u: f64,
    pub balance: f64,
}

/// Grid of run summaries over `(k_th, c_th, seed)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// Per-metric mean and sample standard deviation across seeds of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub k_th: f64,
    pub c_th: f64,
    pub n_seeds: usize,
    pub k_med_mean: f64,
    pub k_med_std: f64,
    pub u_med_mean: f64,
    pub u_med_std: f64,
    pub g_k_mean: f64,
    pub g_k_std: f64,
    pub g_u_mean: f64,
    pub g_u_std: f64,
    pub balance_mean: f64,
    pub balance_std: f64,
}

impl SweepTable {
    pub fn new(rows: Vec<SweepRow>) -> SweepTable {
        let mut t = SweepTable { rows };
        t.sort();
        t
    }

    /// Deterministic `(k_th, c_th, seed)` ordering.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.k_th
                .total_cmp(&b.k_th)
                .then(a.c_th.total_cmp(&b.c_th))
                .then(a.seed.cmp(&b.seed))
        });
    }

    /// Seed means and standard deviations per `(k_th, c_th)` cell, in grid
    /// order. Summation is sequential over the sorted rows, so the output
    /// does not depend on how the table was produced.
    pub fn aggregate(&self) -> Vec<CellStats> {
        let mut sorted = self.clone();
        sorted.sort();
        let mut out = Vec::new();
        let mut i = 0;
        while i < sorted.rows.len() {
            let (k_th, c_th) = (sorted.rows[i].k_th, sorted.rows[i].c_th);
            let mut j = i;
            while j < sorted.rows.len()
                && sorted.rows[j].k_th == k_th
                && sorted.rows[j].c_th == c_th
            {
                j += 1;
            }
            let cell = &sorted.rows[i..j];
            let stat = |f: fn(&SweepRow) -> f64| -> (f64, f64) {
                let n = cell.len() as f64;
                let mean = cell.iter().map(|r| f(r)).sum::<f64>() / n;
                let var = if cell.len() > 1 {
                    cell.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                (mean, var.sqrt())
            };
            let (k_med_mean, k_med_std) = stat(|r| r.k_med);
            let (u_med_mean, u_med_std) = stat(|r| r.u_med);
            let (g_k_mean, g_k_std) = stat(|r| r.g_k);
            let (g_u_mean, g_u_std) = stat(|r| r.g_u);
            let (balance_mean, balance_std) = stat(|r| r.balance);
            out.push(CellStats {
                k_th,
                c_th,
                n_seeds: cell.len(),
                k_med_mean,
                k_med_std,
                u_med_mean,
                u_med_std,
                g_k_mean,
                g_k_std,
                g_u_mean,
                g_u_std,
                balance_mean,
                balance_std,
            });
            i = j;
        }
        out
    }
}
