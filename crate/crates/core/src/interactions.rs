//! Capital-exchange mechanics between agents: pairwise joint business and
//! population-wide threshold redistribution. Pure transforms over capitals;
//! the scheduler decides when they fire.

use rand::Rng;

use crate::error::{Error, Result};

/// Inputs below this bound are rejected by [`redistribute`]: the `1/k`
/// weighting would silently blow up instead of failing loudly.
pub const MIN_CAPITAL_FOR_WEIGHTS: f64 = 1e-12;

/// Joint-business parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusinessParams {
    /// Common savings rate, `0 ≤ λ < 1`.
    pub lambda: f64,
    /// Half-width of the uniform profit/loss rate, `ε_w ≥ 0`.
    pub eps_w: f64,
    /// Pairs drawn per business event (`2m ≤ N`; 0 disables business).
    pub m_pairs: usize,
    /// Business period in days.
    pub t_bp_days: u32,
}

impl BusinessParams {
    pub fn validate(&self, n_agents: usize) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidParam {
                name: "lambda",
                reason: format!("savings rate must lie in [0, 1), got {}", self.lambda),
            });
        }
        if !(self.eps_w >= 0.0) {
            return Err(Error::InvalidParam {
                name: "eps_w",
                reason: format!("profit/loss half-width must be >= 0, got {}", self.eps_w),
            });
        }
        if 2 * self.m_pairs > n_agents {
            return Err(Error::InvalidParam {
                name: "m_pairs",
                reason: format!(
                    "need 2m <= n_agents, got m = {} with n = {}",
                    self.m_pairs, n_agents
                ),
            });
        }
        if self.t_bp_days == 0 {
            return Err(Error::InvalidParam {
                name: "t_bp_days",
                reason: "business period must be at least one day".to_string(),
            });
        }
        Ok(())
    }
}

/// Redistribution schedule: events fire when `(t + t_rs) mod t_rp == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedistParams {
    /// Redistribution period in years.
    pub t_rp_years: f64,
    /// Start offset in years (first event at `t_rp − t_rs`).
    pub t_rs_years: f64,
}

impl RedistParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_rp_years > 0.0) {
            return Err(Error::InvalidParam {
                name: "t_rp_years",
                reason: format!("redistribution period must be positive, got {}", self.t_rp_years),
            });
        }
        if !(self.t_rs_years >= 0.0 && self.t_rs_years < self.t_rp_years) {
            return Err(Error::InvalidParam {
                name: "t_rs_years",
                reason: format!(
                    "start offset must lie in [0, t_rp), got {} with t_rp = {}",
                    self.t_rs_years, self.t_rp_years
                ),
            });
        }
        Ok(())
    }
}

/// The two moral thresholds being swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoralParams {
    /// Redistribution threshold on capital (smaller = stronger moral).
    pub k_th: f64,
    /// Consumption cap on the adjustment target (smaller = stronger moral).
    pub c_th: f64,
}

impl MoralParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_th", self.k_th), ("c_th", self.c_th)] {
            if !(v > 0.0) {
                return Err(Error::InvalidParam {
                    name: if name == "k_th" { "k_th" } else { "c_th" },
                    reason: format!("threshold must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// `Ramp(x) = max(x, 0)`.
#[inline]
pub fn ramp(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        0.0
    }
}

/// One joint business between capitals `k_i` and `k_j`: both stake `(1−λ)`
/// of their capital and get it back scaled by `(1+ε)` in proportion to
/// contribution, so each capital scales by the common factor
/// `λ + (1+ε)(1−λ) = 1 + ε(1−λ)`.
#[inline]
pub fn joint_business(k_i: f64, k_j: f64, lambda: f64, eps: f64) -> (f64, f64) {
    let factor = lambda + (1.0 + eps) * (1.0 - lambda);
    (factor * k_i, factor * k_j)
}

/// Uniform profit/loss draw in `[−eps_w, eps_w]`, shared by both members of
/// a pair.
#[inline]
pub fn draw_profit_rate<R: Rng + ?Sized>(rng: &mut R, eps_w: f64) -> f64 {
    if eps_w == 0.0 {
        return 0.0;
    }
    rng.random_range(-eps_w..=eps_w)
}

/// Draws one pair of distinct, not-yet-used agent indices and marks them
/// used. The second index is drawn from `n−1` values and shifted past the
/// first, so self-pairs never occur; collisions with earlier pairs are
/// rejected and redrawn.
pub(crate) fn select_pair_disjoint<R: Rng + ?Sized>(
    rng: &mut R,
    n_agents: usize,
    used: &mut [bool],
) -> (usize, usize) {
    let i = loop {
        let cand = rng.random_range(0..n_agents);
        if !used[cand] {
            break cand;
        }
    };
    used[i] = true;
    let j = loop {
        let mut cand = rng.random_range(0..n_agents - 1);
        if cand >= i {
            cand += 1;
        }
        if !used[cand] {
            break cand;
        }
    };
    used[j] = true;
    (i, j)
}

/// `m` disjoint pairs of agent indices; no agent appears twice within one
/// event. Fully determined by the RNG state.
pub fn select_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    n_agents: usize,
    m: usize,
) -> Result<Vec<(usize, usize)>> {
    if 2 * m > n_agents {
        return Err(Error::InvalidParam {
            name: "m_pairs",
            reason: format!("need 2m <= n_agents, got m = {m} with n = {n_agents}"),
        });
    }
    let mut used = vec![false; n_agents];
    Ok((0..m)
        .map(|_| select_pair_disjoint(rng, n_agents, &mut used))
        .collect())
}

/// Threshold redistribution: every agent contributes `Ramp(k_i − k_th)` to
/// the pot, which is paid back with weights proportional to `1/k_i`. Pot and
/// weights are computed from pre-event capitals (synchronous update), with
/// sequential left-to-right summation, so the total is conserved up to
/// floating-point rounding.
pub fn redistribute(k: &[f64], k_th: f64) -> Result<Vec<f64>> {
    if !(k_th > 0.0) {
        return Err(Error::InvalidParam {
            name: "k_th",
            reason: format!("redistribution threshold must be positive, got {k_th}"),
        });
    }
    for (i, &ki) in k.iter().enumerate() {
        if !(ki > MIN_CAPITAL_FOR_WEIGHTS) {
            return Err(Error::Domain {
                op: "redistribute",
                reason: format!(
                    "capital of agent {i} is {ki}; 1/k weights need every capital above {MIN_CAPITAL_FOR_WEIGHTS}"
                ),
            });
        }
    }
    let pot: f64 = k.iter().map(|&ki| ramp(ki - k_th)).sum();
    let inv_sum: f64 = k.iter().map(|&ki| 1.0 / ki).sum();
    Ok(k.iter()
        .map(|&ki| ki - ramp(ki - k_th) + (1.0 / ki) / inv_sum * pot)
        .collect())
}

/// Total surplus above the threshold; redistribution is a no-op when zero.
pub fn redistribution_pot(k: &[f64], k_th: f64) -> f64 {
    k.iter().map(|&ki| ramp(ki - k_th)).sum()
}
