//! Regression fits over the sweep surface: a Gauss-type peak model for the
//! balance index and an ordinary least-squares line for the
//! inequality–utility relation, plus the complementarity-ridge extraction.

use crate::error::{Error, Result};
use crate::metrics::CellStats;

/// Gauss-type surface `A·exp(−p(ln k_th − b)² − q(ln c_th − d)²) + B`
/// fitted to the per-cell mean balance index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussSurfaceFit {
    /// Peak amplitude `A`.
    pub amplitude: f64,
    /// Baseline offset `B`.
    pub offset: f64,
    /// Peak center `b` on `ln k_th`.
    pub x_center: f64,
    /// Peak center `d` on `ln c_th`.
    pub y_center: f64,
    /// Curvature `p` along `ln k_th`.
    pub x_curvature: f64,
    /// Curvature `q` along `ln c_th`.
    pub y_curvature: f64,
    /// Coefficient of determination against the mean, `1 − SS_res/Σ(z−z̄)²`.
    pub r_squared: f64,
    /// Against zero, `1 − SS_res/Σz²` — the convention some nonlinear
    /// fitting tools report.
    pub r_squared_uncentered: f64,
    pub ss_res: f64,
    pub iterations: usize,
}

fn finite_balance_points(cells: &[CellStats]) -> Result<Vec<(f64, f64, f64)>> {
    let pts: Vec<(f64, f64, f64)> = cells
        .iter()
        .filter(|c| c.balance_mean.is_finite())
        .map(|c| (c.k_th.ln(), c.c_th.ln(), c.balance_mean))
        .collect();
    if pts.len() < 10 {
        return Err(Error::Degenerate {
            op: "fit_gauss_surface",
            reason: format!("need at least 10 finite cells, got {}", pts.len()),
        });
    }
    Ok(pts)
}

fn gauss_initial_guess(pts: &[(f64, f64, f64)]) -> (f64, f64, f64, f64) {
    let (mut zmin, mut zmax, mut argmax) = (f64::INFINITY, f64::NEG_INFINITY, (0.0, 0.0));
    for &(lk, lc, z) in pts {
        if z < zmin {
            zmin = z;
        }
        if z > zmax {
            zmax = z;
            argmax = (lk, lc);
        }
    }
    (zmax - zmin, zmin, argmax.0, argmax.1)
}

/// Least-squares fit of the Gauss-type surface with all six parameters
/// free, started from `B = min`, `A = max − min`, centers at the argmax
/// cell, `p = 1`, `q = 0.04`.
pub fn fit_gauss_surface(cells: &[CellStats]) -> Result<GaussSurfaceFit> {
    let pts = finite_balance_points(cells)?;
    let (a0, b0, x0, y0) = gauss_initial_guess(&pts);
    let init = vec![a0, b0, x0, y0, 1.0, 0.04];
    let model = |p: &[f64], lk: f64, lc: f64| -> f64 {
        p[0] * (-p[4] * (lk - p[2]).powi(2) - p[5] * (lc - p[3]).powi(2)).exp() + p[1]
    };
    let jac = |p: &[f64], lk: f64, lc: f64, row: &mut [f64]| {
        let dx = lk - p[2];
        let dy = lc - p[3];
        let e = (-p[4] * dx * dx - p[5] * dy * dy).exp();
        row[0] = e;
        row[1] = 1.0;
        row[2] = p[0] * e * 2.0 * p[4] * dx;
        row[3] = p[0] * e * 2.0 * p[5] * dy;
        row[4] = -p[0] * e * dx * dx;
        row[5] = -p[0] * e * dy * dy;
    };
    let (params, ss_res, iterations) = levenberg_marquardt(&pts, init, model, jac)?;
    Ok(build_gauss_fit(&pts, params, ss_res, iterations))
}

/// Anchored variant: pins the surface's peak at the argmax cell
/// (`b = ln k_th`, `d = ln c_th` of the best cell) and the x-curvature at 1,
/// fitting only amplitude, offset and y-curvature. Robust when the peak
/// region is a plateau; its headline number is `r_squared_uncentered`.
pub fn fit_gauss_surface_anchored(cells: &[CellStats]) -> Result<GaussSurfaceFit> {
    let pts = finite_balance_points(cells)?;
    let (a0, b0, x0, y0) = gauss_initial_guess(&pts);
    let init = vec![a0, b0, 0.04];
    let model = move |p: &[f64], lk: f64, lc: f64| -> f64 {
        p[0] * (-(lk - x0).powi(2) - p[2] * (lc - y0).powi(2)).exp() + p[1]
    };
    let jac = move |p: &[f64], lk: f64, lc: f64, row: &mut [f64]| {
        let dx = lk - x0;
        let dy = lc - y0;
        let e = (-dx * dx - p[2] * dy * dy).exp();
        row[0] = e;
        row[1] = 1.0;
        row[2] = -p[0] * e * dy * dy;
    };
    let (params, ss_res, iterations) = levenberg_marquardt(&pts, init, model, jac)?;
    let full = vec![params[0], params[1], x0, y0, 1.0, params[2]];
    Ok(build_gauss_fit(&pts, full, ss_res, iterations))
}

fn build_gauss_fit(
    pts: &[(f64, f64, f64)],
    p: Vec<f64>,
    ss_res: f64,
    iterations: usize,
) -> GaussSurfaceFit {
    let n = pts.len() as f64;
    let mean = pts.iter().map(|&(_, _, z)| z).sum::<f64>() / n;
    let ss_tot: f64 = pts.iter().map(|&(_, _, z)| (z - mean).powi(2)).sum();
    let ss_zero: f64 = pts.iter().map(|&(_, _, z)| z * z).sum();
    GaussSurfaceFit {
        amplitude: p[0],
        offset: p[1],
        x_center: p[2],
        y_center: p[3],
        x_curvature: p[4],
        y_curvature: p[5],
        r_squared: 1.0 - ss_res / ss_tot,
        r_squared_uncentered: 1.0 - ss_res / ss_zero,
        ss_res,
        iterations,
    }
}

const LM_MAX_ITER: usize = 500;
const LM_SS_TOL: f64 = 1e-10;

/// Damped least squares over `(lk, lc, z)` points. Converges when the
/// relative SS_res change drops below 1e-10; reports non-convergence with
/// residual diagnostics after 500 iterations.
fn levenberg_marquardt(
    pts: &[(f64, f64, f64)],
    mut params: Vec<f64>,
    model: impl Fn(&[f64], f64, f64) -> f64,
    jacobian: impl Fn(&[f64], f64, f64, &mut [f64]),
) -> Result<(Vec<f64>, f64, usize)> {
    let np = params.len();
    let ss = |p: &[f64]| -> f64 {
        pts.iter()
            .map(|&(lk, lc, z)| (model(p, lk, lc) - z).powi(2))
            .sum()
    };
    let mut ss_cur = ss(&params);
    let mut lambda = 1e-3;
    let mut row = vec![0.0; np];

    for iter in 1..=LM_MAX_ITER {
        // normal equations J^T J and J^T r
        let mut jtj = vec![vec![0.0; np]; np];
        let mut jtr = vec![0.0; np];
        for &(lk, lc, z) in pts {
            jacobian(&params, lk, lc, &mut row);
            let r = model(&params, lk, lc) - z;
            for a in 0..np {
                jtr[a] += row[a] * r;
                for b in a..np {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }

        let mut stalled = false;
        loop {
            // (J^T J + λ diag(J^T J)) δ = −J^T r
            let mut m = jtj.clone();
            for a in 0..np {
                m[a][a] += lambda * jtj[a][a].max(1e-12);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(delta) = solve_dense(m, rhs) else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    stalled = true;
                    break;
                }
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + d).collect();
            let ss_trial = ss(&trial);
            if ss_trial.is_finite() && ss_trial <= ss_cur {
                let rel_change = (ss_cur - ss_trial) / ss_cur.max(f64::MIN_POSITIVE);
                params = trial;
                ss_cur = ss_trial;
                lambda = (lambda * 0.1).max(1e-12);
                if rel_change < LM_SS_TOL {
                    return Ok((params, ss_cur, iter));
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                stalled = true;
                break;
            }
        }
        if stalled {
            // no step improves SS anymore: the optimum is as converged as
            // the arithmetic allows
            return Ok((params, ss_cur, iter));
        }
    }
    Err(Error::FitDidNotConverge(format!(
        "no convergence after {LM_MAX_ITER} iterations; ss_res = {ss_cur:.6e}, params = {params:?}"
    )))
}

/// Gaussian elimination with partial pivoting; `None` for a singular system.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for c in col + 1..n {
            acc -= m[col][c] * x[c];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

/// Ordinary least-squares line with the two-sided t-test on the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided p-value of the slope against zero (Student-t, n−2 df).
    pub p_value: f64,
    pub slope_std_err: f64,
    pub r_squared: f64,
}

pub fn fit_linear(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Degenerate {
            op: "fit_linear",
            reason: format!("need at least 3 points, got {n}"),
        });
    }
    let nf = n as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - x_mean).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - x_mean) * (p.1 - y_mean))
        .sum();
    let syy: f64 = points.iter().map(|p| (p.1 - y_mean).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate {
            op: "fit_linear",
            reason: "x variance is zero".to_string(),
        });
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res = (syy - slope * sxy).max(0.0);
    let df = nf - 2.0;
    let se = (ss_res / df / sxx).sqrt();
    let p_value = if se == 0.0 {
        // exact fit: a zero slope carries no evidence, any other is certain
        if slope == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        student_t_two_sided_p(slope / se, df)
    };
    let r_squared = if syy > 0.0 {
        1.0 - ss_res / syy
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        p_value,
        slope_std_err: se,
        r_squared,
    })
}

/// For each `k_th` column inside the range, the `c_th` with the highest
/// mean balance and the product `k_th · c_th`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePoint {
    pub k_th: f64,
    pub c_th: f64,
    pub product: f64,
    pub balance: f64,
}

pub fn ridge_products(cells: &[CellStats], k_th_range: (f64, f64)) -> Vec<RidgePoint> {
    let mut columns: Vec<f64> = cells
        .iter()
        .map(|c| c.k_th)
        .filter(|&k| k >= k_th_range.0 && k <= k_th_range.1)
        .collect();
    columns.sort_by(f64::total_cmp);
    columns.dedup();
    columns
        .into_iter()
        .filter_map(|k_th| {
            cells
                .iter()
                .filter(|c| c.k_th == k_th && c.balance_mean.is_finite())
                .max_by(|a, b| a.balance_mean.total_cmp(&b.balance_mean))
                .map(|best| RidgePoint {
                    k_th,
                    c_th: best.c_th,
                    product: k_th * best.c_th,
                    balance: best.balance_mean,
                })
        })
        .collect()
}

/// Two-sided Student-t p-value via the regularized incomplete beta:
/// `p = I_{ν/(ν+t²)}(ν/2, 1/2)`.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    reg_incomplete_beta(0.5 * df, 0.5, df / (df + t * t))
}

/// ln Γ(x), Lanczos approximation (g = 7, 9 coefficients), |err| < 1e-13.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)` by the Lentz continued fraction.
fn reg_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln())
        .exp();
    // use the symmetry that converges fastest
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - reg_incomplete_beta(b, a, 1.0 - x)
    }
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        // even step
        let num = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let num = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
