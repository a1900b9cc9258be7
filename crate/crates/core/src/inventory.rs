//! Supply schedules and the path recursions of the lost-sales and backorder
//! models.
//!
//! With Gaussian demand `D_n = μ + σZ_n` and cumulative supply
//! `μn + κσn^α`, the net demand `S_n = σ(Z_1 + ... + Z_n) - κσn^α` does not
//! depend on `μ`. Cumulative lost sales are the running maximum
//! `L_n = max(L_{n-1}, S_n)` with `L_0 = S_0 = 0`; lost-sales inventory is
//! `H_n = L_n - S_n`. In the backorder model the backlog is `S_n^+` and
//! on-hand inventory `S_n^-`.

use alloc::vec::Vec;

use crate::error::{finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandModel {
    pub mu: f64,
    pub sigma: f64,
}

impl DemandModel {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::domain("demand mean must be finite and >= 0", mu));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain("demand volatility must be finite and > 0", sigma));
        }
        Ok(DemandModel { mu, sigma })
    }

    /// Zero-mean demand with the given volatility. The mean never enters
    /// any lost-sales quantity.
    pub fn centered(sigma: f64) -> Result<Self> {
        Self::new(0.0, sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplyPolicy {
    pub alpha: f64,
    pub kappa: f64,
}

impl SupplyPolicy {
    pub fn new(alpha: f64, kappa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain("alpha must lie in [0, 1]", alpha));
        }
        finite("kappa must be finite", kappa)?;
        Ok(SupplyPolicy { alpha, kappa })
    }

    /// Cumulative safety supply `κ n^α` in units of `σ`, zero at `n = 0`.
    #[inline]
    pub fn cumulative_drift(&self, n: u64) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.kappa * libm::pow(n as f64, self.alpha)
        }
    }

    /// `[κ·1^α, κ·2^α, ..., κ·N^α]`, shared by every simulated path.
    pub fn drift_table(&self, horizon: u64) -> Vec<f64> {
        (1..=horizon).map(|n| self.cumulative_drift(n)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathOutcome {
    /// `S_n`, cumulative demand minus cumulative supply.
    pub net_demand: Vec<f64>,
    /// `L_n`, cumulative lost sales.
    pub lost: Vec<f64>,
    /// `H_n = L_n - S_n`, on-hand inventory in the lost-sales model.
    pub inventory_ls: Vec<f64>,
    /// `B_n = S_n^+`, backlog in the backorder model.
    pub backlog: Vec<f64>,
    /// `H'_n = S_n^-`, on-hand inventory in the backorder model.
    pub inventory_bo: Vec<f64>,
}

impl PathOutcome {
    pub fn len(&self) -> usize {
        self.net_demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.net_demand.is_empty()
    }
}

/// Production quantity of period `n ≥ 1`: `μ + κσ[n^α - (n-1)^α]`.
pub fn supply_schedule(policy: &SupplyPolicy, demand: &DemandModel, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("period index must be >= 1", n as f64));
    }
    let increment = policy.cumulative_drift(n) - policy.cumulative_drift(n - 1);
    Ok(demand.mu + demand.sigma * increment)
}

/// Runs the lost-sales and backorder recursions over a sequence of
/// standard-normal demand shocks.
pub fn evolve_path(noise: &[f64], policy: &SupplyPolicy, demand: &DemandModel) -> Result<PathOutcome> {
    if noise.is_empty() {
        return Err(Error::domain("noise sequence must be nonempty", 0.0));
    }
    if let Some(bad) = noise.iter().find(|z| !z.is_finite()) {
        return Err(Error::domain("noise must be finite", *bad));
    }
    let n = noise.len();
    let mut out = PathOutcome {
        net_demand: Vec::with_capacity(n),
        lost: Vec::with_capacity(n),
        inventory_ls: Vec::with_capacity(n),
        backlog: Vec::with_capacity(n),
        inventory_bo: Vec::with_capacity(n),
    };
    let sigma = demand.sigma;
    let mut walk = 0.0;
    let mut running_max = 0.0_f64;
    for (i, z) in noise.iter().enumerate() {
        walk += z;
        // σ factored out until the end
        let s_units = walk - policy.cumulative_drift(i as u64 + 1);
        running_max = running_max.max(s_units);
        let s = sigma * s_units;
        let l = sigma * running_max;
        out.net_demand.push(s);
        out.lost.push(l);
        out.inventory_ls.push(l - s);
        out.backlog.push(s.max(0.0));
        out.inventory_bo.push((-s).max(0.0));
    }
    Ok(out)
}

/// `L_N / σ` for one path, without materializing the trajectory.
/// `drift[n-1]` holds `κ n^α`.
#[inline]
pub fn terminal_lost_sales<I: IntoIterator<Item = f64>>(noise: I, drift: &[f64]) -> f64 {
    let mut walk = 0.0;
    let mut running_max = 0.0_f64;
    for (z, d) in noise.into_iter().zip(drift) {
        walk += z;
        running_max = running_max.max(walk - d);
    }
    running_max
}
