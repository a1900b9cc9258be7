//! Exact and asymptotic values of `E[L_N]`.
//!
//! For a linear drift (`α = 1`) Spitzer's identity turns the expected running
//! maximum into `σ Σ G(κ√n)/√n`, available here both as the sum itself and in
//! the integral (closed) form. For other exponents [`bound_envelope`] returns
//! the lower and upper bounds that apply in each `(α, κ)` regime.

use crate::error::{finite, Error, Result};
use crate::minimize::bisect;
use crate::normal::{centered_cdf_ratio, density, shortfall, upper_tail, FRAC_1_SQRT_2PI, LOSS_UNDERFLOW};
use crate::quadrature::integrate;

/// Terms past this index are handled by an Euler-Maclaurin tail.
const DIRECT_TERMS: u64 = 1_000_000;
/// Gaussian-moment integrals are truncated here.
const GAUSSIAN_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    LinearPos,
    LinearNeg,
    MidPos,
    MidNeg,
    LowPos,
    LowNeg,
    ZeroDrift,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::LinearPos => "LINEAR_POS",
            Regime::LinearNeg => "LINEAR_NEG",
            Regime::MidPos => "MID_POS",
            Regime::MidNeg => "MID_NEG",
            Regime::LowPos => "LOW_POS",
            Regime::LowNeg => "LOW_NEG",
            Regime::ZeroDrift => "ZERO_DRIFT",
        }
    }

    pub fn classify(alpha: f64, kappa: f64) -> Regime {
        if kappa == 0.0 {
            Regime::ZeroDrift
        } else if alpha >= 1.0 {
            if kappa > 0.0 {
                Regime::LinearPos
            } else {
                Regime::LinearNeg
            }
        } else if alpha > 0.5 {
            if kappa > 0.0 {
                Regime::MidPos
            } else {
                Regime::MidNeg
            }
        } else if kappa > 0.0 {
            Regime::LowPos
        } else {
            Regime::LowNeg
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrowthOrder {
    Bounded,
    SqrtN,
    NAlpha,
    LinearN,
}

impl GrowthOrder {
    pub fn label(self) -> &'static str {
        match self {
            GrowthOrder::Bounded => "bounded",
            GrowthOrder::SqrtN => "sqrt_N",
            GrowthOrder::NAlpha => "N_alpha",
            GrowthOrder::LinearN => "linear_N",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEstimate {
    pub lower: f64,
    pub upper: f64,
    pub regime: Regime,
    pub growth_order: GrowthOrder,
    /// The asymptotic lower formula did not apply at this horizon and the
    /// exact `max_n E[S_n^+]` was reported instead.
    pub lower_is_fallback: bool,
}

fn check_common(sigma: f64, horizon: u64) -> Result<()> {
    if horizon < 1 {
        return Err(Error::domain("horizon N must be >= 1", horizon as f64));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain("sigma must be finite and > 0", sigma));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("alpha must lie in [0, 1]", alpha));
    }
    Ok(())
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `Σ_{n=1}^{N} G(c√n)/√n` for `c ≥ 0`.
fn loss_series(c: f64, horizon: u64) -> f64 {
    // G(c√n) is exactly zero once c√n passes the underflow point
    let last = if c > 0.0 {
        let cutoff = (LOSS_UNDERFLOW / c) * (LOSS_UNDERFLOW / c);
        if cutoff < horizon as f64 {
            (libm::ceil(cutoff) as u64).max(1)
        } else {
            horizon
        }
    } else {
        horizon
    };
    let direct_end = last.min(DIRECT_TERMS);
    let mut acc = Compensated::default();
    for n in (1..=direct_end).rev() {
        let r = libm::sqrt(n as f64);
        acc.add(shortfall(c * r) / r);
    }
    if last > direct_end {
        // Euler-Maclaurin for n in (M, K]; the next correction is O(M^-3.5).
        let m = direct_end as f64;
        let k = last as f64;
        let f = |t: f64| shortfall(c * libm::sqrt(t)) / libm::sqrt(t);
        let df = |t: f64| {
            let r = libm::sqrt(t);
            -shortfall(c * r) / (2.0 * t * r) - c * upper_tail(c * r) / (2.0 * t)
        };
        let integral = if c > 0.0 {
            let (lo, hi) = (c * libm::sqrt(m), c * libm::sqrt(k));
            2.0 / c * crate::normal::loss_integral(lo, hi).unwrap_or(0.0)
        } else {
            2.0 * FRAC_1_SQRT_2PI * (libm::sqrt(k) - libm::sqrt(m))
        };
        acc.add(integral + 0.5 * (f(k) - f(m)) + (df(k) - df(m)) / 12.0);
    }
    acc.value()
}

/// `E[L_N]` for a linear drift: `σ Σ_{n≤N} G(κ√n)/√n`.
///
/// Up to a million terms are summed directly; past that the remainder comes
/// from an Euler-Maclaurin expansion whose error is far below `f64`
/// resolution.
pub fn spitzer_exact(kappa: f64, sigma: f64, horizon: u64) -> Result<f64> {
    check_common(sigma, horizon)?;
    finite("kappa must be finite", kappa)?;
    // G(-x) = G(x) + x contributes |κ| per term when κ < 0
    let drift_part = if kappa < 0.0 { -kappa * horizon as f64 } else { 0.0 };
    Ok(sigma * (loss_series(kappa.abs(), horizon) + drift_part))
}

/// Integral form of the Spitzer sum:
/// `(σ/κ)(Φ(κ√N) - 1/2) + σ√N G(κ√N)`.
pub fn spitzer_closed(kappa: f64, sigma: f64, horizon: u64) -> Result<f64> {
    check_common(sigma, horizon)?;
    finite("kappa must be finite", kappa)?;
    if kappa == 0.0 {
        return Err(Error::domain("closed form needs kappa != 0; use the zero-drift value 2σφ(0)√N", kappa));
    }
    let root_n = libm::sqrt(horizon as f64);
    Ok(sigma * root_n * linear_drift_rate(kappa * root_n))
}

/// `(Φ(y) - 1/2)/y + G(y)`: the Spitzer integral per unit `σ√N`.
fn linear_drift_rate(y: f64) -> f64 {
    let loss = if y < 0.0 { shortfall(-y) - y } else { shortfall(y) };
    centered_cdf_ratio(y) + loss
}

/// `E[S_n^+] = σ√n G(κ n^(α-1/2))`.
fn positive_part_mean(alpha: f64, kappa: f64, sigma: f64, n: u64) -> f64 {
    let nf = n as f64;
    let y = kappa * libm::pow(nf, alpha - 0.5);
    let loss = if y < 0.0 { shortfall(-y) - y } else { shortfall(y) };
    sigma * libm::sqrt(nf) * loss
}

/// Jensen's lower bound `max_{1≤n≤N} E[S_n^+]`.
///
/// `n ↦ E[S_n^+]` is nondecreasing except when `κ > 0` and `α > 1/2`, where it
/// is unimodal with its peak at `κ n^(α-1/2) = y*`. Only the integers next to
/// the peak, and the endpoints, need checking.
pub fn jensen_lower(alpha: f64, kappa: f64, sigma: f64, horizon: u64) -> Result<f64> {
    check_common(sigma, horizon)?;
    check_alpha(alpha)?;
    finite("kappa must be finite", kappa)?;
    let at = |n: u64| positive_part_mean(alpha, kappa, sigma, n);
    if !(kappa > 0.0 && alpha > 0.5) {
        return Ok(at(horizon));
    }
    let peak = peak_period(alpha, kappa)?;
    let mut best = at(1).max(at(horizon));
    if peak < horizon as f64 {
        let below = (libm::floor(peak) as u64).clamp(1, horizon);
        let above = (libm::ceil(peak) as u64).clamp(1, horizon);
        best = best.max(at(below)).max(at(above));
    }
    Ok(best)
}

/// Continuous maximizer of `E[S_n^+]` for `κ > 0`, `α ∈ (1/2, 1]`.
fn peak_period(alpha: f64, kappa: f64) -> Result<f64> {
    let y = loss_rate_root(alpha)?;
    Ok(libm::pow(y / kappa, 2.0 / (2.0 * alpha - 1.0)))
}

/// `(2α - 1)^(-1/2)`, an upper bound on `y*`.
pub fn ystar_upper(alpha: f64) -> f64 {
    1.0 / libm::sqrt(2.0 * alpha - 1.0)
}

fn loss_rate_root(alpha: f64) -> Result<f64> {
    let h = |y: f64| density(y) - 2.0 * alpha * y * upper_tail(y);
    bisect(h, 1e-8, ystar_upper(alpha), 1e-13)
}

/// Positive root of `φ(y) = 2αy Φ̄(y)`, the drift level at which `E[S_n^+]`
/// peaks.
pub fn ystar_root(alpha: f64) -> Result<f64> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::domain("ystar_root requires alpha in (1/2, 1)", alpha));
    }
    loss_rate_root(alpha)
}

/// `C_α = (2/(2α-1)) κ^(-3/(2α-1)) ∫₀^∞ v^((6-6α)/(2α-1)) φ(v) dv`, the
/// constant bounding `E[L_N]/σ` when `α ∈ (1/2, 1)` and `κ > 0`.
pub fn c_alpha(alpha: f64, kappa: f64) -> Result<f64> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::domain("c_alpha requires alpha in (1/2, 1)", alpha));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain("c_alpha requires kappa > 0", kappa));
    }
    let width = 2.0 * alpha - 1.0;
    let power = (6.0 - 6.0 * alpha) / width;
    // near α = 1/2 the moment leaves the f64 range, so integrate
    // v^s φ(v) / (peak value) and rescale in log space
    let mode = libm::sqrt(power);
    let log_peak = if power > 0.0 { power * libm::log(mode) - 0.5 * power } else { 0.0 };
    let integrand = |v: f64| {
        if v == 0.0 {
            if power == 0.0 { FRAC_1_SQRT_2PI } else { 0.0 }
        } else {
            FRAC_1_SQRT_2PI * libm::exp(power * libm::log(v) - 0.5 * v * v - log_peak)
        }
    };
    let cutoff = GAUSSIAN_CUTOFF + mode;
    let coarse = integrate(integrand, 0.0, cutoff, f64::INFINITY)?;
    let tol = (1e-300_f64).max(1e-13 * coarse.value.abs());
    let scaled = integrate(integrand, 0.0, cutoff, tol)?.value;
    let log_value = libm::log(2.0 / width) - 3.0 / width * libm::log(kappa) + log_peak + libm::log(scaled);
    let value = libm::exp(log_value);
    if !value.is_finite() {
        return Err(Error::Numerical("C_alpha exceeds the f64 range"));
    }
    Ok(value)
}

/// Lower and upper bounds on `E[L_N]` for the regime of `(α, κ)`.
pub fn bound_envelope(alpha: f64, kappa: f64, sigma: f64, horizon: u64) -> Result<BoundEstimate> {
    check_common(sigma, horizon)?;
    check_alpha(alpha)?;
    finite("kappa must be finite", kappa)?;
    let regime = Regime::classify(alpha, kappa);
    let nf = horizon as f64;
    let root_n = libm::sqrt(nf);
    let g0 = FRAC_1_SQRT_2PI;
    let mut lower_is_fallback = false;
    let (lower, upper, growth_order) = match regime {
        Regime::ZeroDrift => {
            let v = 2.0 * sigma * g0 * root_n;
            (v, v, GrowthOrder::SqrtN)
        }
        Regime::LinearPos | Regime::LinearNeg => {
            // Spitzer's identity is exact here, so both sides coincide
            let v = spitzer_exact(kappa, sigma, horizon)?;
            let order = if kappa > 0.0 { GrowthOrder::Bounded } else { GrowthOrder::LinearN };
            (v, v, order)
        }
        Regime::MidPos => {
            // an unrepresentable constant leaves the upper side vacuous
            let upper = match c_alpha(alpha, kappa) {
                Ok(c) => sigma * c,
                Err(Error::Numerical(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            let asymptotic = if nf >= ystar_upper(alpha) {
                let y = loss_rate_root(alpha)?;
                sigma * libm::pow(y / kappa, 1.0 / (2.0 * alpha - 1.0)) * shortfall(y)
            } else {
                f64::NAN
            };
            // close to α = 1/2 the product is 0·∞ in f64
            let lower = if asymptotic.is_finite() {
                asymptotic
            } else {
                lower_is_fallback = true;
                jensen_lower(alpha, kappa, sigma, horizon)?
            };
            (lower, upper, GrowthOrder::Bounded)
        }
        Regime::LowPos => {
            let theta_root_n = libm::pow(nf, alpha - 0.5);
            let upper = (sigma * root_n * linear_drift_rate(kappa * theta_root_n)).min(2.0 * sigma * g0 * root_n);
            let mut lower = sigma * root_n * if alpha == 0.5 { shortfall(kappa) } else { g0 };
            if lower > upper {
                // the asymptotic level is not reached yet at this horizon
                lower_is_fallback = true;
                lower = jensen_lower(alpha, kappa, sigma, horizon)?;
            }
            (lower, upper, GrowthOrder::SqrtN)
        }
        Regime::MidNeg => {
            let drift = -kappa * sigma * libm::pow(nf, alpha);
            (drift, 2.0 * sigma * g0 * root_n + drift, GrowthOrder::NAlpha)
        }
        Regime::LowNeg => {
            let drift = -kappa * sigma * libm::pow(nf, alpha);
            let lower = sigma * root_n * if alpha == 0.5 { shortfall(-kappa) - kappa } else { g0 };
            (lower, 2.0 * sigma * g0 * root_n + drift, GrowthOrder::SqrtN)
        }
    };
    Ok(BoundEstimate { lower, upper, regime, growth_order, lower_is_fallback })
}
