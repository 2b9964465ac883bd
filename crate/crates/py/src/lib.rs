//! Python bindings: the simulator, the inequality statistics and the two
//! regression fits, importable as `moralecon`.
//!
//! Usage from Python:
//!
//!     import moralecon
//!     k0, c0 = moralecon.saddle_point(0.5, 0.1, 0.22314, 0.5, 0.0)
//!     r = moralecon.simulate(k_th=1.7, c_th=5.5, seed=1, n_agents=200,
//!                            t_max_years=20.0)
//!     print(r.g_k, r.u_med, r.balance)

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use moralecon_core::engine::{self, ScheduleConfig, TraceConfig};
use moralecon_core::error::Error;
use moralecon_core::fit;
use moralecon_core::interactions::{BusinessParams, MoralParams, RedistParams};
use moralecon_core::metrics::{self, CellStats};
use moralecon_core::EconomyParams;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Simulation { .. } | Error::Io { .. } | Error::FitDidNotConverge(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Saddle-point `(k*, c*)` for the given economy and knowledge rate.
#[pyfunction]
fn saddle_point(alpha: f64, delta: f64, rho: f64, theta: f64, gamma: f64) -> PyResult<(f64, f64)> {
    let params = EconomyParams::new(alpha, delta, rho, theta, gamma).map_err(to_py_err)?;
    let sp = params.saddle_point(gamma).map_err(to_py_err)?;
    Ok((sp.k_star, sp.c_star))
}

/// Gini index of a non-negative sample.
#[pyfunction]
fn gini(values: Vec<f64>) -> PyResult<f64> {
    metrics::gini(&values).map_err(to_py_err)
}

/// Median (mean of the two central elements for even length).
#[pyfunction]
fn median(values: Vec<f64>) -> PyResult<f64> {
    metrics::median(&values).map_err(to_py_err)
}

/// Balance index `u_med / g_k`.
#[pyfunction]
fn balance_index(u_med: f64, g_k: f64) -> PyResult<f64> {
    metrics::balance_index(u_med, g_k).map_err(to_py_err)
}

/// Ordinary least squares: returns `(slope, intercept, p_value)` with the
/// two-sided t-test on the slope.
#[pyfunction]
fn fit_linear(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(PyValueError::new_err("x and y must have equal length"));
    }
    let pts: Vec<(f64, f64)> = x.into_iter().zip(y).collect();
    let f = fit::fit_linear(&pts).map_err(to_py_err)?;
    Ok((f.slope, f.intercept, f.p_value))
}

/// Result of one Gauss-surface fit.
#[pyclass(frozen, get_all)]
struct GaussFit {
    amplitude: f64,
    offset: f64,
    x_center: f64,
    y_center: f64,
    x_curvature: f64,
    y_curvature: f64,
    r_squared: f64,
    r_squared_uncentered: f64,
}

#[pymethods]
impl GaussFit {
    fn __repr__(&self) -> String {
        format!(
            "GaussFit(amplitude={:.4}, offset={:.4}, x_center={:.4}, y_center={:.4}, \
             x_curvature={:.4}, y_curvature={:.4}, r_squared={:.4}, r_squared_uncentered={:.4})",
            self.amplitude,
            self.offset,
            self.x_center,
            self.y_center,
            self.x_curvature,
            self.y_curvature,
            self.r_squared,
            self.r_squared_uncentered
        )
    }
}

/// Fits `A exp(-p (ln k_th - b)^2 - q (ln c_th - d)^2) + B` to per-cell
/// balance values. With `anchored=True`, pins the peak at the argmax cell
/// and the x-curvature at 1 instead of fitting all six parameters.
#[pyfunction]
#[pyo3(signature = (k_th, c_th, balance, anchored = false))]
fn fit_gauss_surface(
    k_th: Vec<f64>,
    c_th: Vec<f64>,
    balance: Vec<f64>,
    anchored: bool,
) -> PyResult<GaussFit> {
    if k_th.len() != c_th.len() || k_th.len() != balance.len() {
        return Err(PyValueError::new_err(
            "k_th, c_th and balance must have equal length",
        ));
    }
    let cells: Vec<CellStats> = k_th
        .iter()
        .zip(&c_th)
        .zip(&balance)
        .map(|((&k, &c), &b)| CellStats {
            k_th: k,
            c_th: c,
            n_seeds: 1,
            k_med_mean: 0.0,
            k_med_std: 0.0,
            u_med_mean: 0.0,
            u_med_std: 0.0,
            g_k_mean: 0.0,
            g_k_std: 0.0,
            g_u_mean: 0.0,
            g_u_std: 0.0,
            balance_mean: b,
            balance_std: 0.0,
        })
        .collect();
    let f = if anchored {
        fit::fit_gauss_surface_anchored(&cells)
    } else {
        fit::fit_gauss_surface(&cells)
    }
    .map_err(to_py_err)?;
    Ok(GaussFit {
        amplitude: f.amplitude,
        offset: f.offset,
        x_center: f.x_center,
        y_center: f.y_center,
        x_curvature: f.x_curvature,
        y_curvature: f.y_curvature,
        r_squared: f.r_squared,
        r_squared_uncentered: f.r_squared_uncentered,
    })
}

/// Final state and summary metrics of one simulation run.
#[pyclass(frozen, get_all)]
struct SimResult {
    final_k: Vec<f64>,
    final_c: Vec<f64>,
    final_u: Vec<f64>,
    k_med: f64,
    u_med: f64,
    g_k: f64,
    g_u: f64,
    balance: f64,
}

#[pymethods]
impl SimResult {
    fn __repr__(&self) -> String {
        format!(
            "SimResult(n={}, k_med={:.4}, u_med={:.4}, g_k={:.4}, g_u={:.4}, balance={:.4})",
            self.final_k.len(),
            self.k_med,
            self.u_med,
            self.g_k,
            self.g_u,
            self.balance
        )
    }
}

/// Runs one seed-deterministic simulation. Defaults match the bundled
/// baseline calibration; `lam` is the savings rate λ.
#[pyfunction]
#[pyo3(signature = (
    k_th,
    c_th,
    seed = 1,
    n_agents = 1000,
    t_max_years = 100.0,
    alpha = 0.5,
    delta = 0.1,
    phi = 0.8,
    theta = 0.5,
    gamma0 = 0.0,
    lam = 0.25,
    eps_w = 0.1,
    m_pairs = 17,
    t_bp_days = 1,
    t_rp_years = 15.0,
    t_rs_years = 0.0,
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    k_th: f64,
    c_th: f64,
    seed: u64,
    n_agents: usize,
    t_max_years: f64,
    alpha: f64,
    delta: f64,
    phi: f64,
    theta: f64,
    gamma0: f64,
    lam: f64,
    eps_w: f64,
    m_pairs: usize,
    t_bp_days: u32,
    t_rp_years: f64,
    t_rs_years: f64,
) -> PyResult<SimResult> {
    let econ =
        EconomyParams::from_time_preference(alpha, delta, phi, theta, gamma0).map_err(to_py_err)?;
    let result = engine::run(
        econ,
        BusinessParams {
            lambda: lam,
            eps_w,
            m_pairs,
            t_bp_days,
        },
        RedistParams {
            t_rp_years,
            t_rs_years,
        },
        MoralParams { k_th, c_th },
        ScheduleConfig {
            n_agents,
            t_max_years,
            seed,
        },
        &TraceConfig::default(),
    )
    .map_err(to_py_err)?;
    Ok(SimResult {
        final_k: result.final_k,
        final_c: result.final_c,
        final_u: result.final_u,
        k_med: result.k_med,
        u_med: result.u_med,
        g_k: result.g_k,
        g_u: result.g_u,
        balance: result.balance,
    })
}

#[pymodule]
fn moralecon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(saddle_point, m)?)?;
    m.add_function(wrap_pyfunction!(gini, m)?)?;
    m.add_function(wrap_pyfunction!(median, m)?)?;
    m.add_function(wrap_pyfunction!(balance_index, m)?)?;
    m.add_function(wrap_pyfunction!(fit_linear, m)?)?;
    m.add_function(wrap_pyfunction!(fit_gauss_surface, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_class::<GaussFit>()?;
    m.add_class::<SimResult>()?;
    Ok(())
}
