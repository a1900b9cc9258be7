//! Hitting-time refinement for the square-root drift.
//!
//! For `α = 1/2` the lost-sales maximum is approximated by
//! `E sup_{1≤s≤t}(B_s - b√s)`, which integrates the crossing probabilities
//! `P[τ_x < t]` over levels `x ≥ 0`. Under the time change
//! `Y(u) = B(e^{2u})/e^u` the crossing becomes the passage of an
//! Ornstein-Uhlenbeck process from `-x` to `b` before `u = (ln t)/2`.
//! Its distribution is bracketed with the Bertsimas-Popescu three-moment
//! bounds, using passage-time moments from simulation.

use alloc::vec::Vec;

use crate::error::{finite, Error, Result};
use crate::normal::{upper_tail, upper_tail_quantile};
use crate::simulate::{sample_ou_passage, Executor, MomentTriple, SimConfig};

/// Integration stops where the crossing probability is certainly below this.
pub const TRUNCATION_LEVEL: f64 = 1e-6;
pub const DEFAULT_NODES: usize = 32;

/// Squared coefficient of variation `C²` and the third-moment analogue `D²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailShape {
    pub cm2: f64,
    pub dm2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBand {
    pub low: f64,
    pub high: f64,
}

impl ProbabilityBand {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.high - self.low)
    }
}

/// Bounds on the right tail `P[X > (1+δ)M₁]` and, for `δ < 1`, the left
/// tail `P[X < (1-δ)M₁]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    pub upper_right: f64,
    pub upper_left: Option<f64>,
}

pub fn tail_shape(m: &MomentTriple) -> Result<TailShape> {
    if !(m.m1 > 0.0) {
        return Err(Error::domain("tail_shape requires m1 > 0", m.m1));
    }
    MomentTriple::new(m.m1, m.m2, m.m3)?;
    let m1sq = m.m1 * m.m1;
    Ok(TailShape {
        cm2: ((m.m2 - m1sq) / m1sq).max(0.0),
        dm2: ((m.m1 * m.m3 - m.m2 * m.m2) / (m1sq * m1sq)).max(0.0),
    })
}

// 0/0 only arises for degenerate shapes; the trivial bound 1 is kept there.
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

fn right_tail_bound(s: &TailShape, delta: f64) -> f64 {
    let (c2, d2) = (s.cm2, s.dm2);
    let v = if delta > c2 {
        let chebyshev = c2 / (c2 + delta * delta);
        let third = ratio(d2, d2 + (c2 - delta) * (c2 - delta)) / (1.0 + delta);
        chebyshev.min(third)
    } else {
        ratio(d2 + (1.0 + delta) * (c2 - delta), d2 + (1.0 + c2) * (c2 - delta)) / (1.0 + delta)
    };
    v.clamp(0.0, 1.0)
}

fn left_tail_bound(s: &TailShape, delta: f64) -> f64 {
    let (c2, d2) = (s.cm2, s.dm2);
    let shifted = c2 + delta;
    let den = (d2 + (c2 + 1.0) * shifted) * (d2 + shifted * shifted);
    (1.0 - ratio(shifted * shifted * shifted, den)).clamp(0.0, 1.0)
}

/// Three-moment bounds on both tails of a nonnegative variable, clamped
/// to `[0, 1]`. The left bound is only defined for `δ < 1`.
pub fn bp_tail_bounds(m: &MomentTriple, delta: f64) -> Result<TailBounds> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain("delta must be finite and > 0", delta));
    }
    let s = tail_shape(m)?;
    Ok(TailBounds {
        upper_right: right_tail_bound(&s, delta),
        upper_left: (delta < 1.0).then(|| left_tail_bound(&s, delta)),
    })
}

/// `2Φ̄((x + min_s b√s)/√(t-1))`: the reflection bound on the crossing
/// probability, which needs no moments.
fn reflection_cap(x: f64, b: f64, t: f64) -> f64 {
    let lowest = b.min(b * libm::sqrt(t));
    (2.0 * upper_tail((x + lowest) / libm::sqrt(t - 1.0))).min(1.0)
}

/// Band on `P[τ_x < t]`, the probability that `B`, started from `B(1) = -x`,
/// meets `b√s` with `b = κ/√σ` before time `t`.
///
/// The passage deadline `u = (ln t)/2` is written as `(1 ± δ)M₁`. Past the
/// mean the right-tail bound gives `[1 - f₁, 1]`; before it the left-tail
/// bound gives `[0, f₂]`. The upper edge is further capped by the
/// reflection bound.
pub fn fpt_probability_band(x: f64, kappa: f64, sigma: f64, t: f64, m: &MomentTriple) -> Result<ProbabilityBand> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("level x must be finite and >= 0", x));
    }
    finite("kappa must be finite", kappa)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain("sigma must be finite and > 0", sigma));
    }
    if t.is_nan() {
        return Err(Error::domain("time t must not be NaN", t));
    }
    if t <= 1.0 {
        return Ok(ProbabilityBand { low: 0.0, high: 0.0 });
    }
    let b = kappa / libm::sqrt(sigma);
    if m.m1 == 0.0 {
        // the passage is immediate
        return Ok(ProbabilityBand { low: 1.0, high: 1.0 });
    }
    let shape = tail_shape(m)?;
    let u = 0.5 * libm::log(t);
    let (low, high) = if u >= m.m1 {
        (1.0 - right_tail_bound(&shape, u / m.m1 - 1.0), 1.0)
    } else {
        (0.0, left_tail_bound(&shape, 1.0 - u / m.m1))
    };
    let high = high.min(reflection_cap(x, b, t));
    Ok(ProbabilityBand { low: low.min(high), high })
}

/// One level of the `x`-integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingNode {
    pub x: f64,
    pub moments: MomentTriple,
    pub band: ProbabilityBand,
    /// Simulated `P[T_{-x,b} ≤ (ln t)/2]` and its standard error.
    pub empirical: f64,
    pub empirical_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingEstimate {
    /// `σ ∫ midpoint(band) dx`.
    pub mean: f64,
    /// `σ ∫ half_width(band) dx`.
    pub half_width: f64,
    /// Monte Carlo error carried through the integral.
    pub stderr: f64,
    /// `σ ∫ P̂[T ≤ u] dx` from the same simulated passages.
    pub empirical: f64,
    pub x_max: f64,
    /// OU target level, in units where `σ = 1`.
    pub level: f64,
    pub censored: u64,
    pub paths: u64,
    pub seed: u64,
    pub nodes: Vec<HittingNode>,
}

impl HittingEstimate {
    /// Total reported uncertainty: band half-width plus Monte Carlo error.
    pub fn uncertainty(&self) -> f64 {
        self.half_width + self.stderr
    }
}

/// `E[L_N]` for `α = 1/2` from the hitting-time representation.
///
/// The integral over `x` uses the trapezoid rule on `nodes` equally spaced
/// levels in `[0, x_max]`, where `x_max` is the level at which the
/// reflection bound drops below [`TRUNCATION_LEVEL`]. Each node simulates
/// passages from `-x` with common random numbers. The computation runs with
/// `σ = 1` (level `b = κ`) and the result is scaled by `σ`, matching the
/// `σ√N ρ(κ)` form of the diffusion limit.
pub fn hitting_ln_estimate<E: Executor>(
    kappa: f64,
    sigma: f64,
    horizon: u64,
    nodes: usize,
    cfg: &SimConfig,
    exec: &E,
) -> Result<HittingEstimate> {
    finite("kappa must be finite", kappa)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain("sigma must be finite and > 0", sigma));
    }
    if horizon < 2 {
        return Err(Error::domain("horizon N must be >= 2", horizon as f64));
    }
    if nodes < 2 {
        return Err(Error::domain("the x grid needs at least 2 nodes", nodes as f64));
    }
    let t = horizon as f64;
    let level = kappa;
    let u = 0.5 * libm::log(t);
    let lowest = level.min(level * libm::sqrt(t));
    let x_max = (libm::sqrt(t - 1.0) * upper_tail_quantile(0.5 * TRUNCATION_LEVEL) - lowest).max(0.0);
    let spacing = x_max / (nodes - 1) as f64;

    let mut out = HittingEstimate {
        mean: 0.0,
        half_width: 0.0,
        stderr: 0.0,
        empirical: 0.0,
        x_max,
        level,
        censored: 0,
        paths: cfg.paths,
        seed: cfg.seed,
        nodes: Vec::with_capacity(nodes),
    };
    if x_max == 0.0 {
        return Ok(out);
    }
    for i in 0..nodes {
        let x = i as f64 * spacing;
        let summary = sample_ou_passage(-x, level, Some(u), cfg, exec)?;
        let band = fpt_probability_band(x, kappa, 1.0, t, &summary.moments)?;
        let within = summary.within.expect("deadline was requested");
        let weight = if i == 0 || i + 1 == nodes { 0.5 * spacing } else { spacing };
        out.mean += weight * band.midpoint();
        out.half_width += weight * band.half_width();
        out.stderr += weight * within.stderr;
        out.empirical += weight * within.mean;
        out.censored += summary.censored;
        out.nodes.push(HittingNode {
            x,
            moments: summary.moments,
            band,
            empirical: within.mean,
            empirical_stderr: within.stderr,
        });
    }
    out.mean *= sigma;
    out.half_width *= sigma;
    out.stderr *= sigma;
    out.empirical *= sigma;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::Sequential;

    fn m(m1: f64, m2: f64, m3: f64) -> MomentTriple {
        MomentTriple::new(m1, m2, m3).unwrap()
    }

    #[test]
    fn tail_shape_examples() {
        assert_eq!(tail_shape(&m(1.0, 2.0, 6.0)).unwrap(), TailShape { cm2: 1.0, dm2: 2.0 });
        assert_eq!(tail_shape(&m(1.0, 1.0, 1.0)).unwrap(), TailShape { cm2: 0.0, dm2: 0.0 });
        assert_eq!(tail_shape(&m(2.0, 8.0, 48.0)).unwrap(), TailShape { cm2: 1.0, dm2: 2.0 });
        assert!(tail_shape(&MomentTriple::zero()).is_err());
        assert!(tail_shape(&MomentTriple { m1: 1.0, m2: 0.5, m3: 1.0 }).is_err());
    }

    #[test]
    fn bound_formulas_on_exponential_moments() {
        let b = bp_tail_bounds(&m(1.0, 2.0, 6.0), 0.5).unwrap();
        // (1/1.5)(2 + 1.5·0.5)/(2 + 2·0.5) and 1 - 1.5³/((2 + 2·1.5)(2 + 1.5²))
        assert!((b.upper_right - 11.0 / 18.0).abs() < 1e-12);
        assert!((b.upper_left.unwrap() - (1.0 - 3.375 / 21.25)).abs() < 1e-12);
        assert!(bp_tail_bounds(&m(1.0, 2.0, 6.0), 1.0).unwrap().upper_left.is_none());
        assert!(bp_tail_bounds(&m(1.0, 2.0, 6.0), 0.0).is_err());
    }

    #[test]
    fn right_bound_is_continuous_at_the_branch_point() {
        let s = tail_shape(&m(1.0, 2.0, 6.0)).unwrap();
        let at = right_tail_bound(&s, 1.0);
        let above = right_tail_bound(&s, 1.0 + 1e-12);
        assert!((at - 0.5).abs() < 1e-12);
        assert!((above - 0.5).abs() < 1e-9);
    }

    #[test]
    fn bounds_hold_for_the_exponential_distribution() {
        let e = m(1.0, 2.0, 6.0);
        for i in 1..40 {
            let delta = 0.05 * i as f64;
            let b = bp_tail_bounds(&e, delta).unwrap();
            assert!(libm::exp(-(1.0 + delta)) <= b.upper_right + 1e-12);
            if let Some(left) = b.upper_left {
                assert!(1.0 - libm::exp(-(1.0 - delta)) <= left + 1e-12);
            }
        }
    }

    #[test]
    fn point_mass_has_no_tails() {
        let b = bp_tail_bounds(&m(1.0, 1.0, 1.0), 0.3).unwrap();
        assert_eq!(b.upper_right, 0.0);
    }

    #[test]
    fn band_edges() {
        let e = m(1.0, 2.0, 6.0);
        assert_eq!(fpt_probability_band(1.0, 1.0, 1.0, 1.0, &e).unwrap(), ProbabilityBand { low: 0.0, high: 0.0 });
        assert_eq!(fpt_probability_band(0.0, 0.0, 1.0, 5.0, &MomentTriple::zero()).unwrap().low, 1.0);
        assert!(fpt_probability_band(-1.0, 1.0, 1.0, 5.0, &e).is_err());
    }

    #[test]
    fn band_is_monotone_in_time() {
        let moments = m(1.3, 2.9, 8.5);
        for (x, kappa) in [(0.0, 1.0), (1.0, 1.0), (2.0, -0.5), (0.5, 0.0)] {
            let mut prev = ProbabilityBand { low: 0.0, high: 0.0 };
            for i in 0..10 {
                let t = 1.0 + 0.5 * libm::exp(0.6 * i as f64);
                let band = fpt_probability_band(x, kappa, 1.0, t, &moments).unwrap();
                assert!(0.0 <= band.low && band.low <= band.high && band.high <= 1.0);
                assert!(band.low >= prev.low - 1e-15 && band.high >= prev.high - 1e-15, "x={x} t={t}");
                prev = band;
            }
        }
    }

    #[test]
    fn estimate_rejects_degenerate_grids() {
        let cfg = SimConfig::new(10, 0);
        assert!(hitting_ln_estimate(1.0, 1.0, 100, 1, &cfg, &Sequential).is_err());
        assert!(hitting_ln_estimate(1.0, 1.0, 1, 32, &cfg, &Sequential).is_err());
    }

    #[test]
    fn sigma_scales_the_estimate() {
        let cfg = SimConfig::new(200, 1).with_steps(400);
        let a = hitting_ln_estimate(1.0, 1.0, 50, 8, &cfg, &Sequential).unwrap();
        let b = hitting_ln_estimate(1.0, 4.0, 50, 8, &cfg, &Sequential).unwrap();
        assert_eq!(b.mean, 4.0 * a.mean);
        assert_eq!(b.half_width, 4.0 * a.half_width);
        assert!(a.mean > 0.0 && a.half_width >= 0.0);
    }
}
