//! Seed-deterministic agent-based economy: every agent follows saddle-point
//! capital/consumption dynamics with CRRA utility, while random pairwise
//! joint business and periodic threshold redistribution move capital between
//! agents. Two moral thresholds — `k_th` on redistributed capital and `c_th`
//! on consumption — are swept over a grid to measure their effect on wealth
//! inequality (Gini) and utility, with surface/line fits over the results.
//!
//! Modules:
//! - [`econ`]: closed-form saddle points, adjustment paths, utility accrual
//! - [`interactions`]: joint business and threshold redistribution
//! - [`engine`]: the day-by-day scheduler over the population
//! - [`metrics`]: Gini, median, balance index, sweep aggregation
//! - [`fit`]: Gauss-type surface fit, OLS with t-test, ridge extraction
//! - [`config`], [`sweep`], [`export`]: TOML config, parallel grid runner,
//!   CSV/SVG artifacts

pub mod config;
pub mod econ;
pub mod engine;
pub mod error;
pub mod export;
pub mod fit;
pub mod interactions;
pub mod metrics;
pub mod sweep;

pub use config::{parse_config, SweepConfig};
pub use econ::{AdjustmentPath, EconomyParams, SaddlePoint};
pub use engine::{run, AgentState, Engine, RunResult, ScheduleConfig, TraceConfig};
pub use error::{Error, Result};
pub use fit::{fit_gauss_surface, fit_gauss_surface_anchored, fit_linear, GaussSurfaceFit, LinearFit};
pub use interactions::{BusinessParams, MoralParams, RedistParams};
pub use metrics::{balance_index, gini, median, SweepRow, SweepTable};
pub use sweep::run_sweep;
