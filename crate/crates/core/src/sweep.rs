//! Parallel execution of the `(k_th, c_th, seed)` grid. Every task owns an
//! independent engine, so the table is a pure function of the configuration
//! and seeds no matter how many worker threads run it.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::engine::{self, TraceConfig};
use crate::error::{Error, Result};
use crate::interactions::MoralParams;
use crate::metrics::{SweepRow, SweepTable};

/// Wall-clock accounting for one sweep.
#[derive(Debug, Clone, Default)]
pub struct SweepTiming {
    /// `(k_th, c_th, seed, seconds)` per run, in table order.
    pub per_run: Vec<(f64, f64, u64, f64)>,
    pub total_seconds: f64,
}

/// Runs one engine per `(cell, seed)` with `parallelism` worker threads and
/// returns rows in deterministic `(k_th, c_th, seed)` order.
pub fn run_sweep(cfg: &SweepConfig, parallelism: usize) -> Result<(SweepTable, SweepTiming)> {
    cfg.validate()?;
    let econ = cfg.economy_params()?;
    let business = cfg.business_params();
    let redist = cfg.redist_params();

    let mut tasks: Vec<(MoralParams, u64)> = Vec::new();
    for cell in cfg.cells() {
        for &seed in &cfg.sweep.seeds {
            tasks.push((cell, seed));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Config {
            path: "threads".to_string(),
            reason: e.to_string(),
        })?;

    let started = Instant::now();
    let runs: Result<Vec<(SweepRow, f64)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(morals, seed)| {
                let t0 = Instant::now();
                let result = engine::run(
                    econ,
                    business,
                    redist,
                    morals,
                    cfg.schedule(seed),
                    &TraceConfig::default(),
                )
                .map_err(|e| match e {
                    Error::Simulation { day, agent, reason } => Error::Simulation {
                        day,
                        agent,
                        reason: format!(
                            "cell (k_th = {}, c_th = {}, seed = {seed}): {reason}",
                            morals.k_th, morals.c_th
                        ),
                    },
                    other => other,
                })?;
                let row = SweepRow {
                    k_th: morals.k_th,
                    c_th: morals.c_th,
                    seed,
                    k_med: result.k_med,
                    u_med: result.u_med,
                    g_k: result.g_k,
                    g_u: result.g_u,
                    balance: result.balance,
                };
                Ok((row, t0.elapsed().as_secs_f64()))
            })
            .collect()
    });
    let runs = runs?;

    let mut table = SweepTable::new(runs.iter().map(|(row, _)| *row).collect());
    table.sort();
    let mut per_run: Vec<(f64, f64, u64, f64)> = runs
        .iter()
        .map(|(row, secs)| (row.k_th, row.c_th, row.seed, *secs))
        .collect();
    per_run.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    Ok((
        table,
        SweepTiming {
            per_run,
            total_seconds: started.elapsed().as_secs_f64(),
        },
    ))
}
