//! Reproducible Monte Carlo.
//!
//! Paths are cut into fixed blocks of [`BLOCK_PATHS`]. Each block is reduced
//! sequentially in path order, and block results are merged in block order,
//! so the floating-point result depends only on `(seed, paths, steps)` and
//! never on which [`Executor`] ran the blocks or how many workers it used.
//! Every path draws from its own counter-based [`Stream`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::inventory::{terminal_lost_sales, DemandModel, SupplyPolicy};
use crate::rng::{Domain, Stream};

pub const BLOCK_PATHS: u64 = 256;

/// Passage-time simulations stop here; survivors are censored at this time.
pub const OU_HORIZON: f64 = 20.0;

// Skip the bridge test when the crossing probability is below e^-40.
const BRIDGE_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub paths: u64,
    pub seed: u64,
    /// Time steps for continuous-time functionals.
    pub steps: u64,
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(paths: u64, seed: u64) -> Self {
        SimConfig { paths, seed, steps: 1000, antithetic: false }
    }

    pub fn with_steps(mut self, steps: u64) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_antithetic(mut self, antithetic: bool) -> Self {
        self.antithetic = antithetic;
        self
    }

    fn check_paths(&self) -> Result<()> {
        if self.paths < 1 {
            return Err(Error::domain("paths must be >= 1", 0.0));
        }
        if self.antithetic && (self.paths < 2 || self.paths % 2 != 0) {
            return Err(Error::domain("antithetic sampling needs an even path count >= 2", self.paths as f64));
        }
        Ok(())
    }

    fn check_steps(&self, minimum: u64) -> Result<()> {
        if self.steps < minimum {
            return Err(Error::domain("too few time steps", self.steps as f64));
        }
        Ok(())
    }

    /// Independent sampling units: paths, or antithetic pairs.
    fn units(&self) -> u64 {
        if self.antithetic {
            self.paths / 2
        } else {
            self.paths
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub paths: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_accumulator(acc: &Accumulator, cfg: &SimConfig, scale: f64) -> Self {
        McEstimate {
            mean: scale * acc.mean,
            stderr: scale * acc.stderr(),
            paths: cfg.paths,
            seed: cfg.seed,
        }
    }
}

/// First three raw moments of a nonnegative random time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTriple {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl MomentTriple {
    /// Checks `m1 ≥ 0`, `m2 ≥ m1²` and `m1 m3 ≥ m2²`, allowing rounding at
    /// the `1e-12` relative level.
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        if !(m1.is_finite() && m2.is_finite() && m3.is_finite()) {
            return Err(Error::domain("moments must be finite", m1 + m2 + m3));
        }
        if m1 < 0.0 {
            return Err(Error::domain("first moment must be >= 0", m1));
        }
        let slack = 1e-12;
        if m2 < m1 * m1 * (1.0 - slack) {
            return Err(Error::domain("second moment below the squared mean", m2 - m1 * m1));
        }
        if m1 * m3 < m2 * m2 * (1.0 - slack) {
            return Err(Error::domain("moments violate m1*m3 >= m2^2", m1 * m3 - m2 * m2));
        }
        Ok(MomentTriple { m1, m2, m3 })
    }

    pub fn zero() -> Self {
        MomentTriple { m1: 0.0, m2: 0.0, m3: 0.0 }
    }
}

/// Streaming mean and variance (Welford), mergeable with Chan's update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulator {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Accumulator {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / n;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count += other.count;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            libm::sqrt(self.variance() / self.count as f64)
        }
    }
}

/// Runs independent blocks of work and returns their results in block order.
pub trait Executor {
    fn map_blocks<T, F>(&self, blocks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs every block on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_blocks<T, F>(&self, blocks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..blocks).map(f).collect()
    }
}

fn block_count(units: u64) -> usize {
    units.div_ceil(BLOCK_PATHS) as usize
}

fn block_range(block: usize, units: u64) -> core::ops::Range<u64> {
    let start = block as u64 * BLOCK_PATHS;
    start..(start + BLOCK_PATHS).min(units)
}

/// Means and variances of a `width`-vector statistic over `units` paths.
/// `f(unit, out)` fills `out` for one path.
pub fn accumulate<E, F>(exec: &E, units: u64, width: usize, f: F) -> Vec<Accumulator>
where
    E: Executor,
    F: Fn(u64, &mut [f64]) + Sync,
{
    let blocks = exec.map_blocks(block_count(units), |b| {
        let mut accs = vec![Accumulator::default(); width];
        let mut buf = vec![0.0; width];
        for unit in block_range(b, units) {
            f(unit, &mut buf);
            for (acc, x) in accs.iter_mut().zip(&buf) {
                acc.push(*x);
            }
        }
        accs
    });
    let mut total = vec![Accumulator::default(); width];
    for block in &blocks {
        for (t, a) in total.iter_mut().zip(block) {
            t.merge(a);
        }
    }
    total
}

/// `f(0), ..., f(units - 1)` in index order.
pub fn collect<E, F>(exec: &E, units: u64, f: F) -> Vec<f64>
where
    E: Executor,
    F: Fn(u64) -> f64 + Sync,
{
    let blocks = exec.map_blocks(block_count(units), |b| block_range(b, units).map(&f).collect::<Vec<f64>>());
    blocks.concat()
}

/// Accumulates `f(stream, sign, out)` over the configured sampling units.
/// With antithetic sampling each unit averages the path and its mirror.
fn accumulate_paths<E, F>(exec: &E, cfg: &SimConfig, domain: Domain, width: usize, f: F) -> Vec<Accumulator>
where
    E: Executor,
    F: Fn(&Stream, f64, &mut [f64]) + Sync,
{
    let seed = cfg.seed;
    if cfg.antithetic {
        accumulate(exec, cfg.units(), width, |unit, out| {
            let stream = Stream::new(seed, domain, unit);
            let mut mirror = vec![0.0; out.len()];
            f(&stream, 1.0, out);
            f(&stream, -1.0, &mut mirror);
            for (o, m) in out.iter_mut().zip(&mirror) {
                *o = 0.5 * (*o + m);
            }
        })
    } else {
        accumulate(exec, cfg.units(), width, |unit, out| {
            f(&Stream::new(seed, domain, unit), 1.0, out);
        })
    }
}

/// Monte Carlo estimate of `E[L_N]`.
///
/// Paths are simulated in units of `σ` and rescaled at the end, so changing
/// `σ` by a power of two scales the estimate exactly.
pub fn sample_ln<E: Executor>(
    policy: &SupplyPolicy,
    demand: &DemandModel,
    horizon: u64,
    cfg: &SimConfig,
    exec: &E,
) -> Result<McEstimate> {
    if horizon < 1 {
        return Err(Error::domain("horizon N must be >= 1", 0.0));
    }
    cfg.check_paths()?;
    let drift = policy.drift_table(horizon);
    let accs = accumulate_paths(exec, cfg, Domain::LostSales, 1, |stream, sign, out| {
        out[0] = terminal_lost_sales((0..horizon).map(|i| sign * stream.normal(i)), &drift);
    });
    Ok(McEstimate::from_accumulator(&accs[0], cfg, demand.sigma))
}

fn sqrt_table(steps: u64) -> Vec<f64> {
    (1..=steps).map(|n| libm::sqrt(n as f64)).collect()
}

/// Running maxima of `W_n - κ_k √n` for several drifts along one path.
fn sqrt_drift_maxima(stream: &Stream, sign: f64, roots: &[f64], kappas: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|m| *m = 0.0);
    let mut walk = 0.0;
    for (i, r) in roots.iter().enumerate() {
        walk += sign * stream.normal(i as u64);
        for (m, k) in out.iter_mut().zip(kappas) {
            *m = m.max(walk - k * r);
        }
    }
}

/// `ρ(κ) = E sup_{t≤1}(B_t - κ√t)`, estimated by the random-walk prelimit
/// `max_{n≤N}(Z_1 + ... + Z_n - κ√n)/√N` with `N = cfg.steps`.
///
/// The discrete maximum undershoots the continuous supremum by
/// `O(steps^(-1/2))`.
pub fn sample_rho<E: Executor>(kappa: f64, cfg: &SimConfig, exec: &E) -> Result<McEstimate> {
    Ok(sample_rho_grid(&[kappa], cfg, exec)?[0])
}

/// [`sample_rho`] at several drifts on common random numbers.
pub fn sample_rho_grid<E: Executor>(kappas: &[f64], cfg: &SimConfig, exec: &E) -> Result<Vec<McEstimate>> {
    cfg.check_paths()?;
    cfg.check_steps(2)?;
    if let Some(bad) = kappas.iter().find(|k| !k.is_finite()) {
        return Err(Error::domain("kappa must be finite", *bad));
    }
    let roots = sqrt_table(cfg.steps);
    let scale = 1.0 / libm::sqrt(cfg.steps as f64);
    let accs = accumulate_paths(exec, cfg, Domain::Brownian, kappas.len(), |stream, sign, out| {
        sqrt_drift_maxima(stream, sign, &roots, kappas, out);
    });
    Ok(accs.iter().map(|a| McEstimate::from_accumulator(a, cfg, scale)).collect())
}

/// Central difference `(ρ(κ+h) - ρ(κ-h))/2h` on common random numbers,
/// with the standard error of the per-path difference.
pub fn rho_slope<E: Executor>(kappa: f64, h: f64, cfg: &SimConfig, exec: &E) -> Result<McEstimate> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain("difference step must be > 0", h));
    }
    cfg.check_paths()?;
    cfg.check_steps(2)?;
    let roots = sqrt_table(cfg.steps);
    let pair = [kappa + h, kappa - h];
    let scale = 1.0 / (2.0 * h * libm::sqrt(cfg.steps as f64));
    let accs = accumulate_paths(exec, cfg, Domain::Brownian, 1, |stream, sign, out| {
        let mut m = [0.0; 2];
        sqrt_drift_maxima(stream, sign, &roots, &pair, &mut m);
        out[0] = m[0] - m[1];
    });
    Ok(McEstimate::from_accumulator(&accs[0], cfg, scale))
}

/// Probability that a Brownian bridge between `(0, d0)` and `(1, d1)` touches
/// zero, for two positive gaps to a boundary.
#[inline]
fn bridge_crossing(d0: f64, d1: f64, variance: f64) -> f64 {
    let exponent = 2.0 * d0 * d1 / variance;
    if exponent > BRIDGE_CUTOFF {
        0.0
    } else {
        libm::exp(-exponent)
    }
}

/// First time `u` at which `dY = -Y du + √2 dW`, `Y(0) = a`, reaches `b`,
/// by Euler-Maruyama with a Brownian-bridge test for crossings inside a
/// step. `None` if the path survives to `cap`.
///
/// The process `Y(u) = B(e^{2u})/e^u` built from a standard Brownian motion
/// follows exactly these dynamics.
pub fn ou_passage(stream: &Stream, sign: f64, a: f64, b: f64, dt: f64, cap: f64) -> Option<f64> {
    if a >= b {
        return Some(0.0);
    }
    let shock = libm::sqrt(2.0 * dt);
    let decay = 1.0 - dt;
    let max_steps = libm::ceil(cap / dt - 1e-9) as u64;
    let mut y = a;
    for k in 0..max_steps {
        let next = y * decay + shock * sign * stream.normal(2 * k);
        let time = (k + 1) as f64 * dt;
        if next >= b {
            return Some(time);
        }
        let p = bridge_crossing(b - y, b - next, 2.0 * dt);
        if p > 0.0 && stream.uniform(2 * k + 1) < p {
            return Some(time);
        }
        y = next;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageSummary {
    pub moments: MomentTriple,
    pub moment_stderr: [f64; 3],
    /// `P[T ≤ deadline]`, when a deadline was requested.
    pub within: Option<McEstimate>,
    /// Paths still running at the cap, counted at the cap time.
    pub censored: u64,
    pub paths: u64,
    pub dt: f64,
}

fn passage_args(a: f64, b: f64, cfg: &SimConfig) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("passage levels must be finite", a + b));
    }
    if a > b {
        return Err(Error::domain("passage needs a <= b", a - b));
    }
    cfg.check_paths()?;
    cfg.check_steps(2)?;
    Ok(OU_HORIZON / cfg.steps as f64)
}

/// Moments of the OU passage time `T_{a,b}` with time step
/// `dt = 20 / steps`, plus `P[T ≤ deadline]` from the same paths.
pub fn sample_ou_passage<E: Executor>(
    a: f64,
    b: f64,
    deadline: Option<f64>,
    cfg: &SimConfig,
    exec: &E,
) -> Result<PassageSummary> {
    let dt = passage_args(a, b, cfg)?;
    if let Some(d) = deadline {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::domain("deadline must be finite and >= 0", d));
        }
    }
    let cutoff = deadline.unwrap_or(f64::INFINITY);
    let accs = accumulate_paths(exec, cfg, Domain::OrnsteinUhlenbeck, 5, |stream, sign, out| {
        let (t, censored) = match ou_passage(stream, sign, a, b, dt, OU_HORIZON) {
            Some(t) => (t, 0.0),
            None => (OU_HORIZON, 1.0),
        };
        out[0] = t;
        out[1] = t * t;
        out[2] = t * t * t;
        out[3] = if t <= cutoff { 1.0 } else { 0.0 };
        out[4] = censored;
    });
    let moments = if a == b {
        MomentTriple::zero()
    } else {
        MomentTriple::new(accs[0].mean, accs[1].mean, accs[2].mean)?
    };
    // antithetic units average two paths; report censoring in paths
    let per_unit = if cfg.antithetic { 2.0 } else { 1.0 };
    Ok(PassageSummary {
        moments,
        moment_stderr: [accs[0].stderr(), accs[1].stderr(), accs[2].stderr()],
        within: deadline.map(|_| McEstimate::from_accumulator(&accs[3], cfg, 1.0)),
        censored: libm::round(accs[4].mean * accs[4].count as f64 * per_unit) as u64,
        paths: cfg.paths,
        dt,
    })
}

/// Moments of `T_{a,b}` estimated from simulated passages.
pub fn sample_ou_fpt_moments<E: Executor>(a: f64, b: f64, cfg: &SimConfig, exec: &E) -> Result<MomentTriple> {
    Ok(sample_ou_passage(a, b, None, cfg, exec)?.moments)
}

/// Individual passage times in path order; censored paths are reported at
/// the cap. Antithetic sampling is ignored here.
pub fn sample_ou_passage_times<E: Executor>(a: f64, b: f64, cfg: &SimConfig, exec: &E) -> Result<Vec<f64>> {
    let dt = passage_args(a, b, cfg)?;
    let seed = cfg.seed;
    Ok(collect(exec, cfg.paths, |path| {
        let stream = Stream::new(seed, Domain::OrnsteinUhlenbeck, path);
        ou_passage(&stream, 1.0, a, b, dt, OU_HORIZON).unwrap_or(OU_HORIZON)
    }))
}

/// `P[T_{a,b} ≤ deadline]` with the step `dt = deadline / steps`.
pub fn sample_ou_passage_probability<E: Executor>(
    a: f64,
    b: f64,
    deadline: f64,
    cfg: &SimConfig,
    exec: &E,
) -> Result<McEstimate> {
    passage_args(a, b, cfg)?;
    if !(deadline > 0.0) || !deadline.is_finite() {
        return Err(Error::domain("deadline must be finite and > 0", deadline));
    }
    let dt = deadline / cfg.steps as f64;
    let accs = accumulate_paths(exec, cfg, Domain::OrnsteinUhlenbeck, 1, |stream, sign, out| {
        out[0] = match ou_passage(stream, sign, a, b, dt, deadline) {
            Some(_) => 1.0,
            None => 0.0,
        };
    });
    Ok(McEstimate::from_accumulator(&accs[0], cfg, 1.0))
}

/// `P[sup_{1≤s≤t}(B_s - κ√s) ≥ x]` for a Brownian motion started at
/// `B(1) = 0`, simulated on a uniform grid of `steps` intervals with a bridge
/// correction against the linearly interpolated boundary.
pub fn sample_sqrt_boundary_crossing<E: Executor>(
    x: f64,
    kappa: f64,
    t: f64,
    cfg: &SimConfig,
    exec: &E,
) -> Result<McEstimate> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("level x must be finite and >= 0", x));
    }
    if !kappa.is_finite() {
        return Err(Error::domain("kappa must be finite", kappa));
    }
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::domain("end time t must be finite and > 1", t));
    }
    cfg.check_paths()?;
    cfg.check_steps(2)?;
    let ds = (t - 1.0) / cfg.steps as f64;
    let shock = libm::sqrt(ds);
    let boundary: Vec<f64> = (0..=cfg.steps).map(|k| x + kappa * libm::sqrt(1.0 + k as f64 * ds)).collect();
    let accs = accumulate_paths(exec, cfg, Domain::PinnedBrownian, 1, |stream, sign, out| {
        out[0] = 0.0;
        if boundary[0] <= 0.0 {
            out[0] = 1.0;
            return;
        }
        let mut w = 0.0;
        for k in 0..cfg.steps {
            let next = w + shock * sign * stream.normal(2 * k);
            let gap = boundary[k as usize + 1] - next;
            if gap <= 0.0 {
                out[0] = 1.0;
                return;
            }
            let p = bridge_crossing(boundary[k as usize] - w, gap, ds);
            if p > 0.0 && stream.uniform(2 * k + 1) < p {
                out[0] = 1.0;
                return;
            }
            w = next;
        }
    });
    Ok(McEstimate::from_accumulator(&accs[0], cfg, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::{upper_tail, FRAC_1_SQRT_2PI};

    #[test]
    fn accumulator_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1 - 3.0).collect();
        let mut whole = Accumulator::default();
        xs.iter().for_each(|x| whole.push(*x));
        let mut left = Accumulator::default();
        let mut right = Accumulator::default();
        xs[..313].iter().for_each(|x| left.push(*x));
        xs[313..].iter().for_each(|x| right.push(*x));
        left.merge(&right);
        assert_eq!(left.count, 1000);
        assert!((left.mean - whole.mean).abs() < 1e-13);
        assert!((left.variance() - whole.variance()).abs() < 1e-11);
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 999.0;
        assert!((whole.variance() - var).abs() < 1e-11);
    }

    #[test]
    fn collect_preserves_order_across_blocks() {
        let v = collect(&Sequential, 1000, |i| i as f64);
        assert_eq!(v.len(), 1000);
        assert!(v.iter().enumerate().all(|(i, x)| *x == i as f64));
    }

    #[test]
    fn config_validation() {
        let p = SupplyPolicy::new(0.5, 1.0).unwrap();
        let d = DemandModel::centered(1.0).unwrap();
        assert!(sample_ln(&p, &d, 10, &SimConfig::new(0, 0), &Sequential).is_err());
        assert!(sample_ln(&p, &d, 0, &SimConfig::new(10, 0), &Sequential).is_err());
        assert!(sample_ln(&p, &d, 10, &SimConfig::new(11, 0).with_antithetic(true), &Sequential).is_err());
        assert!(sample_rho(0.0, &SimConfig::new(10, 0).with_steps(1), &Sequential).is_err());
        assert!(sample_ou_fpt_moments(1.0, 0.0, &SimConfig::new(10, 0), &Sequential).is_err());
    }

    #[test]
    fn single_step_lost_sales_is_the_loss_function() {
        // N = 1: L_1 = (Z - κ)^+, so E = G(κ)
        let p = SupplyPolicy::new(0.5, 0.7).unwrap();
        let d = DemandModel::centered(1.0).unwrap();
        let est = sample_ln(&p, &d, 1, &SimConfig::new(200_000, 3), &Sequential).unwrap();
        let g = crate::normal::shortfall(0.7);
        assert!((est.mean - g).abs() < 4.0 * est.stderr, "{est:?} vs {g}");
    }

    #[test]
    fn sigma_scales_exactly() {
        let p = SupplyPolicy::new(0.75, 0.4).unwrap();
        let cfg = SimConfig::new(2000, 9);
        let one = sample_ln(&p, &DemandModel::centered(1.0).unwrap(), 50, &cfg, &Sequential).unwrap();
        let two = sample_ln(&p, &DemandModel::new(7.0, 2.0).unwrap(), 50, &cfg, &Sequential).unwrap();
        assert_eq!(two.mean, 2.0 * one.mean);
        assert_eq!(two.stderr, 2.0 * one.stderr);
    }

    #[test]
    fn rho_grid_matches_single_calls() {
        let cfg = SimConfig::new(600, 4).with_steps(200);
        let grid = sample_rho_grid(&[0.0, 0.5, 1.0], &cfg, &Sequential).unwrap();
        for (i, k) in [0.0, 0.5, 1.0].iter().enumerate() {
            assert_eq!(grid[i], sample_rho(*k, &cfg, &Sequential).unwrap());
        }
        assert!(grid[0].mean > grid[1].mean && grid[1].mean > grid[2].mean);
    }

    #[test]
    fn rho_slope_matches_grid_difference() {
        let cfg = SimConfig::new(500, 2).with_steps(300);
        let g = sample_rho_grid(&[0.55, 0.45], &cfg, &Sequential).unwrap();
        let s = rho_slope(0.5, 0.05, &cfg, &Sequential).unwrap();
        assert!((s.mean - (g[0].mean - g[1].mean) / 0.1).abs() < 1e-9);
        assert!(s.mean < 0.0);
    }

    #[test]
    fn ou_passage_is_immediate_at_or_above_the_level() {
        let s = Stream::new(0, Domain::OrnsteinUhlenbeck, 0);
        assert_eq!(ou_passage(&s, 1.0, 0.5, 0.5, 0.01, 20.0), Some(0.0));
        let m = sample_ou_fpt_moments(0.3, 0.3, &SimConfig::new(10, 0), &Sequential).unwrap();
        assert_eq!(m, MomentTriple::zero());
    }

    #[test]
    fn ou_stationary_variance_is_one() {
        // run the Euler scheme long enough to forget Y(0) = 0
        let dt: f64 = 0.01;
        let n = 20_000;
        let mut acc = Accumulator::default();
        for p in 0..n {
            let s = Stream::new(1, Domain::OrnsteinUhlenbeck, p);
            let mut y = 0.0;
            for k in 0..1000 {
                y = y * (1.0 - dt) + (2.0 * dt).sqrt() * s.normal(k);
            }
            acc.push(y);
        }
        // Euler's stationary variance is 1/(1 - dt/2)
        assert!((acc.variance() - 1.0 / (1.0 - dt / 2.0)).abs() < 0.04);
    }

    #[test]
    fn pinned_crossing_against_reflection() {
        // κ = 0: P[sup_{[1,t]} B - B(1) ≥ x] = 2 Φ̄(x/√(t-1))
        let cfg = SimConfig::new(40_000, 5).with_steps(400);
        let est = sample_sqrt_boundary_crossing(1.0, 0.0, 5.0, &cfg, &Sequential).unwrap();
        let exact = 2.0 * upper_tail(0.5);
        assert!((est.mean - exact).abs() < 4.0 * est.stderr, "{est:?} vs {exact}");
    }

    #[test]
    fn zero_drift_rho_near_reflection_value() {
        let cfg = SimConfig::new(4000, 8).with_steps(2000);
        let r = sample_rho(0.0, &cfg, &Sequential).unwrap();
        // discrete maximum sits ≈ 0.5826/√steps below √(2/π)
        let target = 2.0 * FRAC_1_SQRT_2PI - 0.5826 / (2000f64).sqrt();
        assert!((r.mean - target).abs() < 4.0 * r.stderr);
    }

    #[test]
    fn antithetic_pairs_share_one_stream() {
        let p = SupplyPolicy::new(0.5, 0.2).unwrap();
        let d = DemandModel::centered(1.0).unwrap();
        let cfg = SimConfig::new(2, 0).with_antithetic(true);
        let pair = sample_ln(&p, &d, 30, &cfg, &Sequential).unwrap();
        let s = Stream::new(0, Domain::LostSales, 0);
        let drift = p.drift_table(30);
        let plus = terminal_lost_sales((0..30).map(|i| s.normal(i)), &drift);
        let minus = terminal_lost_sales((0..30).map(|i| -s.normal(i)), &drift);
        assert_eq!(pair.mean, 0.5 * (plus + minus));
        assert_eq!(pair.paths, 2);
    }

    #[test]
    fn moment_triple_validation() {
        assert!(MomentTriple::new(1.0, 2.0, 6.0).is_ok());
        assert!(MomentTriple::new(-1.0, 2.0, 6.0).is_err());
        assert!(MomentTriple::new(1.0, 0.5, 6.0).is_err());
        assert!(MomentTriple::new(1.0, 2.0, 3.0).is_err());
    }
}
