//! Closed-form macroeconomic kernel: saddle points of the capital/consumption
//! system, knowledge-rate inversion, adjustment-path dynamics and utility
//! accrual. Everything here is a pure function of its inputs.
//!
//! Capital follows `k' = k^α − c − (δ+γ)k` and consumption
//! `c' = c · (α k^(α−1) − δ − ρ − θγ) / θ`. Setting both derivatives to zero
//! gives the saddle `k* = ((δ+ρ+θγ)/α)^(1/(α−1))`, `c* = k*^α − (δ+γ)k*`.
//! After a discrete capital change, consumption relaxes exponentially toward
//! the new saddle (or a cap) at speed `μ < 0`.

use crate::error::{Error, Result};

/// Macroeconomic constants shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomyParams {
    /// Production-function exponent, `0 < α < 1`.
    pub alpha: f64,
    /// Capital depletion rate per year, `δ > 0`.
    pub delta: f64,
    /// Discount rate of time preference per year, `ρ > 0`.
    pub rho: f64,
    /// Relative risk aversion coefficient, `θ > 0`, `θ ≠ 1`.
    pub theta: f64,
    /// Initial knowledge growth rate per year.
    pub gamma0: f64,
}

impl EconomyParams {
    pub fn new(alpha: f64, delta: f64, rho: f64, theta: f64, gamma0: f64) -> Result<Self> {
        let p = EconomyParams {
            alpha,
            delta,
            rho,
            theta,
            gamma0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`EconomyParams::new`] but with the discount rate given as a
    /// time-preference factor `φ`, converted via `ρ = ln(1/φ)`.
    pub fn from_time_preference(
        alpha: f64,
        delta: f64,
        phi: f64,
        theta: f64,
        gamma0: f64,
    ) -> Result<Self> {
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::InvalidParam {
                name: "phi",
                reason: format!("time preference must lie in (0, 1), got {phi}"),
            });
        }
        Self::new(alpha, delta, (1.0 / phi).ln(), theta, gamma0)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(cond: bool, name: &'static str, reason: String) -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::InvalidParam { name, reason })
            }
        }
        check(
            self.alpha > 0.0 && self.alpha < 1.0,
            "alpha",
            format!("production exponent must lie in (0, 1), got {}", self.alpha),
        )?;
        check(
            self.delta > 0.0,
            "delta",
            format!("depletion rate must be positive, got {}", self.delta),
        )?;
        check(
            self.rho > 0.0,
            "rho",
            format!("discount rate must be positive, got {}", self.rho),
        )?;
        check(
            self.theta > 0.0,
            "theta",
            format!("risk aversion must be positive, got {}", self.theta),
        )?;
        check(
            self.theta != 1.0,
            "theta",
            "theta = 1 makes the utility form c^(1-θ)/(1-θ) singular".to_string(),
        )?;
        check(
            (self.delta + self.rho + self.theta * self.gamma0) / self.alpha > 0.0,
            "gamma0",
            "(delta + rho + theta*gamma0)/alpha must be positive".to_string(),
        )?;
        Ok(())
    }

    /// Saddle-point capital for knowledge rate `gamma`:
    /// `k* = ((δ + ρ + θγ)/α)^(1/(α−1))`.
    pub fn saddle_capital(&self, gamma: f64) -> Result<f64> {
        let base = (self.delta + self.rho + self.theta * gamma) / self.alpha;
        if base <= 0.0 || !base.is_finite() {
            return Err(Error::Domain {
                op: "saddle_capital",
                reason: format!("(delta + rho + theta*gamma)/alpha = {base} is not positive"),
            });
        }
        Ok(base.powf(1.0 / (self.alpha - 1.0)))
    }

    /// Saddle-point consumption `c* = k*^α − (δ + γ)k*`.
    pub fn saddle_consumption(&self, k_star: f64, gamma: f64) -> f64 {
        k_star.powf(self.alpha) - (self.delta + gamma) * k_star
    }

    pub fn saddle_point(&self, gamma: f64) -> Result<SaddlePoint> {
        let k_star = self.saddle_capital(gamma)?;
        Ok(SaddlePoint {
            k_star,
            c_star: self.saddle_consumption(k_star, gamma),
            gamma,
        })
    }

    /// Knowledge rate that makes `k_a_star` a saddle point:
    /// `γ = (α k^(α−1) − δ − ρ)/θ`. Inverse of [`EconomyParams::saddle_capital`].
    pub fn knowledge_rate_for_capital(&self, k_a_star: f64) -> Result<f64> {
        if k_a_star <= 0.0 {
            return Err(Error::Domain {
                op: "knowledge_rate_for_capital",
                reason: format!("capital must be positive, got {k_a_star}"),
            });
        }
        Ok((self.alpha * k_a_star.powf(self.alpha - 1.0) - self.delta - self.rho) / self.theta)
    }

    /// Broad-sense discount rate `β = ρ − (1−θ)γ`.
    pub fn broad_discount_rate(&self, gamma: f64) -> f64 {
        self.rho - (1.0 - self.theta) * gamma
    }

    /// Adjustment speed toward a new saddle: returns `(μ, β)` with
    /// `μ = (β − sqrt(β² − 4 f''(k*) c*/θ))/2`, `f'' = α(α−1)k*^(α−2)`.
    ///
    /// `f'' < 0` makes the discriminant exceed `β²`, so `μ < 0` always.
    pub fn adjustment_speed(&self, k_a_star: f64, c_a_star: f64, gamma_a: f64) -> (f64, f64) {
        debug_assert!(k_a_star > 0.0 && c_a_star > 0.0);
        let beta = self.broad_discount_rate(gamma_a);
        let f2 = self.alpha * (self.alpha - 1.0) * k_a_star.powf(self.alpha - 2.0);
        let mu = (beta - (beta * beta - 4.0 * f2 * c_a_star / self.theta).sqrt()) / 2.0;
        (mu, beta)
    }

    /// Residuals `(k', c')` of the dynamic system at `(k, c, γ)`. Both vanish
    /// at the saddle point.
    pub fn rck_residuals(&self, k: f64, c: f64, gamma: f64) -> (f64, f64) {
        let k_dot = k.powf(self.alpha) - c - (self.delta + gamma) * k;
        let c_dot =
            c * (self.alpha * k.powf(self.alpha - 1.0) - self.delta - self.rho - self.theta * gamma)
                / self.theta;
        (k_dot, c_dot)
    }

    /// Instantaneous utility `c^(1−θ)/(1−θ)`.
    pub fn utility_instant(&self, c: f64) -> f64 {
        c.powf(1.0 - self.theta) / (1.0 - self.theta)
    }
}

/// Stationary point of the capital/consumption dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlePoint {
    pub k_star: f64,
    pub c_star: f64,
    /// Knowledge growth rate consistent with `k_star`.
    pub gamma: f64,
}

/// Exponential relaxation of consumption after a capital change.
///
/// `c(t) = c_target + e^(μ(t − t_event)) (c_origin − c_target)` for
/// `t ≥ t_event`, converging to `c_target` (the new saddle consumption, or
/// the consumption cap when the saddle exceeds it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustmentPath {
    /// Consumption at the moment of the capital change.
    pub c_origin: f64,
    /// Convergence target.
    pub c_target: f64,
    /// Adjustment speed, strictly negative.
    pub mu: f64,
    /// Broad-sense discount rate for this path's knowledge rate.
    pub beta: f64,
    /// Absolute time of the capital change, years.
    pub t_event: f64,
}

impl AdjustmentPath {
    /// A path that stays at `c` forever (no pending adjustment).
    pub fn degenerate(c: f64, mu: f64, beta: f64, t_event: f64) -> Self {
        AdjustmentPath {
            c_origin: c,
            c_target: c,
            mu,
            beta,
            t_event,
        }
    }

    /// Consumption at absolute time `t ≥ t_event`. Returns `c_origin`
    /// exactly at `t == t_event`.
    pub fn consumption_at(&self, t: f64) -> f64 {
        if t == self.t_event {
            return self.c_origin;
        }
        self.c_target + (self.mu * (t - self.t_event)).exp() * (self.c_origin - self.c_target)
    }
}

/// One-step capital gain while consumption is held below its saddle value:
/// `(c_a_star − c_now) · dt`.
pub fn capital_drift_increment(c_a_star: f64, c_now: f64, dt: f64) -> f64 {
    (c_a_star - c_now) * dt
}

/// One-step utility accrual `e^(−β(t − t_event)) · c^(1−θ)/(1−θ) · dt`,
/// discounting from the most recent capital-change time.
pub fn utility_increment(
    c_now: f64,
    theta: f64,
    beta: f64,
    t: f64,
    t_event: f64,
    dt: f64,
) -> Result<f64> {
    if theta == 1.0 {
        return Err(Error::Domain {
            op: "utility_increment",
            reason: "theta = 1 makes c^(1-θ)/(1-θ) singular".to_string(),
        });
    }
    debug_assert!(c_now > 0.0 && t >= t_event && dt > 0.0);
    Ok((-beta * (t - t_event)).exp() * c_now.powf(1.0 - theta) / (1.0 - theta) * dt)
}
