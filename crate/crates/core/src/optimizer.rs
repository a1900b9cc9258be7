//! Choosing the safety multiplier `κ` for the square-root plan (`α = 1/2`).
//!
//! The production/lost-sales cost `σ√N cκ + p E[L_N]` has no closed form, so
//! it is replaced by surrogates whose objectives scale as `σ√N` times a
//! function of `κ` alone:
//!
//! * lower surrogate `cκ + pG(κ)`, minimized at `κ_ℓ = Φ̄⁻¹(c/p)`;
//! * upper surrogate `F(κ) = cκ + p[(Φ(κ) - 1/2)/κ + G(κ)]`;
//! * the diffusion limit `cκ + pρ(κ)`, estimated by simulation.
//!
//! Costs with holding terms are mapped back to this form by
//! [`apply_holding`]; the backorder model has the closed-form optimum of
//! [`backorder_solve`].

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::minimize::{bisect, brent, golden_section};
use crate::normal::{centered_cdf_ratio, density, shortfall, upper_tail, upper_tail_quantile, FRAC_1_SQRT_2PI};
use crate::simulate::{rho_slope, sample_rho, sample_rho_grid, Executor, McEstimate, SimConfig};

/// Every solution here fixes the square-root exponent.
pub const PLAN_EXPONENT: f64 = 0.5;

const BROWNIAN_GRID: usize = 41;
const FIT_POINTS: usize = 7;
const SLOPE_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    /// Production cost per unit.
    pub c: f64,
    /// Lost-sales penalty per unit.
    pub p: f64,
    /// Holding cost over the horizon, lost-sales model.
    pub h: f64,
    /// Backlog penalty per unit.
    pub b: f64,
    /// Holding cost over the horizon, backorder model.
    pub h_prime: f64,
}

impl CostParams {
    pub fn new(c: f64, p: f64, h: f64, b: f64, h_prime: f64) -> Result<Self> {
        for (what, v) in [
            ("cost c must be finite and >= 0", c),
            ("cost p must be finite and >= 0", p),
            ("cost h must be finite and >= 0", h),
            ("cost b must be finite and >= 0", b),
            ("cost h_prime must be finite and >= 0", h_prime),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(what, v));
            }
        }
        Ok(CostParams { c, p, h, b, h_prime })
    }

    /// Production and lost-sales costs only.
    pub fn production(c: f64, p: f64) -> Result<Self> {
        Self::new(c, p, 0.0, 0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LowerSurrogate,
    UpperSurrogate,
    UpperUnconstrained,
    Brownian,
    Backorder,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::LowerSurrogate => "LOWER_SURROGATE",
            Method::UpperSurrogate => "UPPER_SURROGATE",
            Method::UpperUnconstrained => "UPPER_UNCONSTRAINED",
            Method::Brownian => "BROWNIAN",
            Method::Backorder => "BACKORDER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub kappa: f64,
    pub objective: f64,
    pub method: Method,
    pub alpha: f64,
    /// Monte Carlo standard error of the objective, when simulated.
    pub stderr: Option<f64>,
}

impl Solution {
    fn exact(kappa: f64, objective: f64, method: Method) -> Self {
        Solution { kappa, objective, method, alpha: PLAN_EXPONENT, stderr: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub v_lower: f64,
    pub v_upper: f64,
    pub ratio: f64,
    pub ratio_lower_cert: f64,
    pub ratio_upper_cert: f64,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
}

fn check_scale(sigma: f64, horizon: u64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain("sigma must be finite and > 0", sigma));
    }
    if horizon < 1 {
        return Err(Error::domain("horizon N must be >= 1", 0.0));
    }
    Ok(sigma * libm::sqrt(horizon as f64))
}

fn check_newsvendor(c: f64, p: f64) -> Result<()> {
    if !(c > 0.0) {
        return Err(Error::domain("production cost c must be > 0", c));
    }
    if !(p > c) {
        return Err(Error::domain("lost-sales penalty p must exceed c", p));
    }
    Ok(())
}

/// `κ_ℓ = Φ̄⁻¹(c/p)`, the minimizer of `cκ + pG(κ)`.
pub fn kappa_lower(c: f64, p: f64) -> Result<f64> {
    if !c.is_finite() || !p.is_finite() {
        return Err(Error::domain("costs must be finite", c + p));
    }
    check_newsvendor(c, p)?;
    Ok(upper_tail_quantile(c / p))
}

/// Lower surrogate: `V^ℓ = σ√N pφ(κ_ℓ)`.
pub fn solve_lower(costs: &CostParams, sigma: f64, horizon: u64) -> Result<Solution> {
    let scale = check_scale(sigma, horizon)?;
    let kappa = kappa_lower(costs.c, costs.p)?;
    Ok(Solution::exact(kappa, scale * (costs.p * density(kappa)), Method::LowerSurrogate))
}

/// `F(κ) = cκ + p[(Φ(κ) - 1/2)/κ + G(κ)]`, continuous at `κ = 0` where it
/// equals `2pφ(0)`.
pub fn upper_objective(c: f64, p: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return 2.0 * p * FRAC_1_SQRT_2PI;
    }
    c * kappa + p * (centered_cdf_ratio(kappa) + shortfall(kappa))
}

/// `F'(κ) = c - pΦ̄(κ) + p[φ(κ)/κ - (Φ(κ) - 1/2)/κ²]`, with a series near
/// zero where the bracket cancels. `F'(0⁺) = c - p/2`.
pub fn upper_slope(c: f64, p: f64, kappa: f64) -> f64 {
    let bracket = if kappa.abs() < 1e-3 {
        FRAC_1_SQRT_2PI * (-kappa / 3.0 + kappa * kappa * kappa / 10.0)
    } else {
        (density(kappa) - centered_cdf_ratio(kappa)) / kappa
    };
    c - p * upper_tail(kappa) + p * bracket
}

/// `cκ + pG(κ) - (p/κ)(1/2 - Φ̄(κ))`, zero at an interior optimum of `F`.
pub fn upper_optimality_residual(c: f64, p: f64, kappa: f64) -> f64 {
    c * kappa + p * shortfall(kappa) - p * centered_cdf_ratio(kappa)
}

/// Minimizes `F` on `[lo, hi]` and polishes the interior stationary point
/// by bisection on the analytic slope.
fn minimize_upper(c: f64, p: f64, lo: f64, hi: f64) -> Result<f64> {
    let coarse = brent(|k| upper_objective(c, p, k), lo, hi, 1e-9)?;
    let slope = |k: f64| upper_slope(c, p, k);
    let mut a = (coarse.x - 1e-3).max(lo);
    let mut b = (coarse.x + 1e-3).min(hi);
    if slope(a) > 0.0 || slope(b) < 0.0 {
        // widen once in case Brent stopped on a flat stretch
        a = (coarse.x - 0.5).max(lo);
        b = (coarse.x + 0.5).min(hi);
    }
    if slope(a) < 0.0 && slope(b) > 0.0 {
        bisect(slope, a, b, 0.0)
    } else {
        Ok(coarse.x)
    }
}

/// Smallest `x ≥ start` (doubling) with `F'(x) > 0`.
fn slope_turns_positive(c: f64, p: f64, start: f64) -> Result<f64> {
    let mut x = start;
    for _ in 0..80 {
        if upper_slope(c, p, x) > 0.0 {
            return Ok(x);
        }
        x *= 2.0;
    }
    Err(Error::Numerical("upper surrogate slope never turns positive"))
}

/// Upper surrogate `V^u = σ√N min F`.
///
/// Constrained to `κ ≥ 0`, the minimizer is `0` exactly when `p ≤ 2c`,
/// since `F'(0⁺) = c - p/2` and `F` is convex there. Without the
/// constraint and with `p ≤ c` the surrogate decreases without bound as
/// `κ → -∞`; that limit is reported as `κ = -∞`.
pub fn solve_upper(costs: &CostParams, sigma: f64, horizon: u64, constrained: bool) -> Result<Solution> {
    let scale = check_scale(sigma, horizon)?;
    let (c, p) = (costs.c, costs.p);
    if !(c > 0.0) || !(p > 0.0) {
        return Err(Error::domain("upper surrogate needs c > 0 and p > 0", c.min(p)));
    }
    if constrained {
        if p <= 2.0 * c {
            return Ok(Solution::exact(0.0, scale * upper_objective(c, p, 0.0), Method::UpperSurrogate));
        }
        let hi = slope_turns_positive(c, p, 1.0)?;
        let kappa = minimize_upper(c, p, 0.0, hi)?;
        return Ok(Solution::exact(kappa, scale * upper_objective(c, p, kappa), Method::UpperSurrogate));
    }
    if p < c {
        return Ok(Solution::exact(f64::NEG_INFINITY, f64::NEG_INFINITY, Method::UpperUnconstrained));
    }
    if p == c {
        // F decreases to 0 as κ → -∞
        return Ok(Solution::exact(f64::NEG_INFINITY, 0.0, Method::UpperUnconstrained));
    }
    let hi = slope_turns_positive(c, p, 1.0)?;
    let mut lo = -1.0;
    for _ in 0..80 {
        if upper_slope(c, p, lo) < 0.0 {
            break;
        }
        lo *= 2.0;
    }
    let kappa = minimize_upper(c, p, lo, hi)?;
    Ok(Solution::exact(kappa, scale * upper_objective(c, p, kappa), Method::UpperUnconstrained))
}

/// Lower and upper surrogate values with the certificate
/// `2 ≤ V^u/V^ℓ ≤ 2φ(0)/φ(κ_ℓ)`.
pub fn ratio_report(costs: &CostParams, sigma: f64, horizon: u64) -> Result<RatioReport> {
    let lower = solve_lower(costs, sigma, horizon)?;
    let upper = solve_upper(costs, sigma, horizon, true)?;
    if lower.kappa > upper.kappa {
        return Err(Error::Numerical("surrogate solutions out of order (kappa_l > kappa_u)"));
    }
    // the ratio is formed before the common σ√N factor
    let ratio = upper_objective(costs.c, costs.p, upper.kappa) / (costs.p * density(lower.kappa));
    Ok(RatioReport {
        v_lower: lower.objective,
        v_upper: upper.objective,
        ratio,
        ratio_lower_cert: 2.0,
        ratio_upper_cert: 2.0 * FRAC_1_SQRT_2PI / density(lower.kappa),
        kappa_lower: lower.kappa,
        kappa_upper: upper.kappa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub kappa: f64,
    /// `σ√N (cκ + pρ̂(κ))`.
    pub objective: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianReport {
    pub solution: Solution,
    pub rho: McEstimate,
    /// `ρ̂'(κ*)` by a common-random-number central difference.
    pub rho_slope: McEstimate,
    pub grid: Vec<GridPoint>,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
}

/// Least-squares parabola through `(x, y)` points: `(a, b, c)` of
/// `a + bx + cx²`, in coordinates centered at `x0`.
fn fit_parabola(xs: &[f64], ys: &[f64], x0: f64) -> Option<(f64, f64, f64)> {
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for (x, y) in xs.iter().zip(ys) {
        let d = x - x0;
        let mut pw = 1.0;
        for k in 0..5 {
            s[k] += pw;
            if k < 3 {
                t[k] += pw * y;
            }
            pw *= d;
        }
    }
    // normal equations, solved by Cramer's rule
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det = det3(m);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut coef = [0.0; 3];
    for (j, c) in coef.iter_mut().enumerate() {
        let mut mj = m;
        for (row, tv) in mj.iter_mut().zip(&t) {
            row[j] = *tv;
        }
        *c = det3(mj) / det;
    }
    Some((coef[0], coef[1], coef[2]))
}

/// Minimizes the diffusion-limit cost `cκ + pρ(κ)` with simulated `ρ`.
///
/// `ρ̂` is evaluated on a grid over `[κ_ℓ - 1, κ_u + 1]` with common random
/// numbers. A least-squares parabola through the seven points around the
/// best grid value smooths the noise, and golden-section search on that
/// parabola gives `κ*`. The reported objective re-estimates `ρ̂(κ*)` on the
/// same streams and carries the `σ√N` factor.
pub fn brownian_optimize<E: Executor>(
    costs: &CostParams,
    sigma: f64,
    horizon: u64,
    cfg: &SimConfig,
    exec: &E,
) -> Result<BrownianReport> {
    let scale = check_scale(sigma, horizon)?;
    let (c, p) = (costs.c, costs.p);
    let kappa_l = kappa_lower(c, p)?;
    let kappa_u = solve_upper(costs, sigma, horizon, true)?.kappa;
    let (lo, hi) = (kappa_l - 1.0, kappa_u + 1.0);
    let kappas: Vec<f64> = (0..BROWNIAN_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (BROWNIAN_GRID - 1) as f64)
        .collect();
    let rho = sample_rho_grid(&kappas, cfg, exec)?;
    let values: Vec<f64> = kappas.iter().zip(&rho).map(|(k, r)| c * k + p * r.mean).collect();
    let grid: Vec<GridPoint> = kappas
        .iter()
        .zip(&rho)
        .zip(&values)
        .map(|((k, r), v)| GridPoint { kappa: *k, objective: scale * v, stderr: scale * p * r.stderr })
        .collect();

    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(Error::Numerical("empty optimization grid"))?;
    let start = best.saturating_sub(FIT_POINTS / 2).min(BROWNIAN_GRID - FIT_POINTS);
    let window = start..start + FIT_POINTS;
    let (wl, wh) = (kappas[window.start], kappas[window.end - 1]);
    let kappa = match fit_parabola(&kappas[window.clone()], &values[window], kappas[best]) {
        Some((a, b, q)) if q > 0.0 => {
            let center = kappas[best];
            golden_section(|k| a + b * (k - center) + q * (k - center) * (k - center), wl, wh, 1e-10)?.x
        }
        _ => kappas[best],
    };

    let rho_star = sample_rho(kappa, cfg, exec)?;
    let slope = rho_slope(kappa, SLOPE_STEP, cfg, exec)?;
    let solution = Solution {
        kappa,
        objective: scale * (c * kappa + p * rho_star.mean),
        method: Method::Brownian,
        alpha: PLAN_EXPONENT,
        stderr: Some(scale * p * rho_star.stderr),
    };
    Ok(BrownianReport { solution, rho: rho_star, rho_slope: slope, grid, kappa_lower: kappa_l, kappa_upper: kappa_u })
}

/// Folds holding cost into the surrogate costs: `c ← c + h`, `p ← p + h`.
///
/// The averaged holding cost is `(2/3)h σ√N (...)`; callers pass the
/// already-rescaled `h`, and no factor is applied here.
pub fn apply_holding(costs: &CostParams) -> CostParams {
    CostParams { c: costs.c + costs.h, p: costs.p + costs.h, h: 0.0, ..*costs }
}

/// Backorder optimum `y' = Φ̄⁻¹((c + h')/(b + h'))` of
/// `(c + h')κ + (b + h')G(κ)`, with objective `σ√N (b + h')φ(y')`.
pub fn backorder_solve(costs: &CostParams, sigma: f64, horizon: u64) -> Result<Solution> {
    let scale = check_scale(sigma, horizon)?;
    let (c, b, hp) = (costs.c, costs.b, costs.h_prime);
    if !(c < b) {
        return Err(Error::domain("backorder model needs c < b", c - b));
    }
    let under = c + hp;
    let over = b + hp;
    if !(under > 0.0) {
        return Err(Error::domain("backorder model needs c + h' > 0", under));
    }
    let kappa = upper_tail_quantile(under / over);
    Ok(Solution::exact(kappa, scale * (under * kappa + over * shortfall(kappa)), Method::Backorder))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalencePoint {
    pub p: f64,
    /// `σ√N (c + h) y`: the lost-sales optimum without its vanishing
    /// penalty term.
    pub lost_sales: f64,
    pub backorder: f64,
    pub ratio: f64,
    pub kappa_lost_sales: f64,
    pub kappa_backorder: f64,
}

/// Lost-sales versus backorder optimal costs as the penalty grows, with
/// `b = p` and `h' = h`.
///
/// The lost-sales optimum is `σ√N (c + h) y + o(y)` with
/// `y = Φ̄⁻¹((c + h)/(p + h))`; its leading term is compared with the exact
/// backorder optimum. The ratio equals `yΦ̄(y)/φ(y)` and rises to 1; it is
/// positive only once `p > 2c + h`, where `y > 0`.
pub fn equivalence_curve(c: f64, h: f64, p_list: &[f64], sigma: f64, horizon: u64) -> Result<Vec<EquivalencePoint>> {
    let scale = check_scale(sigma, horizon)?;
    if p_list.is_empty() {
        return Err(Error::domain("p_list must be nonempty", 0.0));
    }
    if p_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("p_list must be strictly ascending", 0.0));
    }
    let mut out = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let costs = CostParams::new(c, p, h, p, h)?;
        if !(p > c) {
            return Err(Error::domain("every p must exceed c", p));
        }
        let held = apply_holding(&costs);
        let y = kappa_lower(held.c, held.p)?;
        let backorder = backorder_solve(&costs, sigma, horizon)?;
        let lost_sales = scale * (held.c * y);
        out.push(EquivalencePoint {
            p,
            lost_sales,
            backorder: backorder.objective,
            ratio: lost_sales / backorder.objective,
            kappa_lost_sales: y,
            kappa_backorder: backorder.kappa,
        });
    }
    Ok(out)
}
