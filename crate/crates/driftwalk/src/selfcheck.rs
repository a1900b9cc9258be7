//! A fast subset of the invariant suite, runnable from an installed binary.

use serde_json::{json, Value};

use driftwalk_core::asymptotics::{bound_envelope, spitzer_closed, spitzer_exact};
use driftwalk_core::hitting::bp_tail_bounds;
use driftwalk_core::inventory::{DemandModel, SupplyPolicy};
use driftwalk_core::normal::{loss, pdf, FRAC_1_SQRT_2PI};
use driftwalk_core::optimizer::{equivalence_curve, ratio_report, CostParams};
use driftwalk_core::simulate::{sample_ln, MomentTriple, Sequential, SimConfig};

use crate::commands::{Outcome, SelfcheckArgs};
use crate::error::CliError;
use crate::exec::Pooled;
use crate::record::Table;

type Check = Result<(bool, String), CliError>;

fn loss_function() -> Check {
    let g1 = loss(1.0)?;
    let ok = (g1 - 0.083_315_470_587_686_3).abs() < 1e-15 && loss(0.0)? == FRAC_1_SQRT_2PI;
    Ok((ok, format!("G(1) = {g1:.16e}")))
}

fn zero_drift_envelope() -> Check {
    let e = bound_envelope(0.5, 0.0, 1.0, 100)?;
    let target = 20.0 * FRAC_1_SQRT_2PI;
    let ok = e.lower == e.upper && (e.upper - target).abs() < 1e-12;
    Ok((ok, format!("lower = upper = {:.6}", e.upper)))
}

fn linear_drift_limit() -> Check {
    let v = spitzer_closed(1.0, 1.0, 1_000_000)?;
    Ok(((0.495..=0.505).contains(&v), format!("closed form at N = 1e6: {v:.6}")))
}

fn envelope_ordering() -> Check {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=20 {
        for j in 0..=8 {
            for n in [100, 10_000] {
                let e = bound_envelope(i as f64 / 20.0, -2.0 + 0.5 * j as f64, 1.0, n)?;
                worst = worst.max(e.lower - e.upper);
            }
        }
    }
    Ok((worst <= 0.0, format!("max(lower - upper) = {worst:.3e}")))
}

fn ratio_certificate() -> Check {
    let mut ok = true;
    for ratio in [2.0, 2.5, 4.0, 10.0, 40.0] {
        let r = ratio_report(&CostParams::production(1.0, ratio)?, 1.0, 100)?;
        ok &= r.ratio >= 2.0 - 1e-9 && r.ratio <= 2.0 * FRAC_1_SQRT_2PI / pdf(r.kappa_lower)? + 1e-9;
        ok &= r.kappa_lower <= r.kappa_upper;
    }
    let edge = ratio_report(&CostParams::production(1.0, 2.0)?, 1.0, 100)?;
    ok &= edge.ratio == 2.0 && edge.kappa_lower == 0.0 && edge.kappa_upper == 0.0;
    Ok((ok, format!("ratio at p = 2c: {}", edge.ratio)))
}

fn tail_bound_formulas() -> Check {
    let b = bp_tail_bounds(&MomentTriple::new(1.0, 2.0, 6.0)?, 0.5)?;
    let left = b.upper_left.unwrap_or(f64::NAN);
    let ok = (b.upper_right - 11.0 / 18.0).abs() < 1e-12 && (left - (1.0 - 3.375 / 21.25)).abs() < 1e-12;
    Ok((ok, format!("f1 = {:.6}, f2 = {left:.6}", b.upper_right)))
}

fn equivalence_limit() -> Check {
    let curve = equivalence_curve(1.0, 0.5, &[10.0, 100.0, 1000.0], 1.0, 100)?;
    let gaps: Vec<f64> = curve.iter().map(|p| (p.ratio - 1.0).abs()).collect();
    let ok = gaps[2] <= 0.1 && gaps.windows(2).all(|w| w[1] <= w[0]);
    Ok((ok, format!("|ratio - 1| = {gaps:.4?}")))
}

fn linear_drift_simulation(paths: u64, seed: u64, exec: &Pooled) -> Check {
    let cfg = SimConfig::new(paths, seed);
    let e = sample_ln(&SupplyPolicy::new(1.0, 1.0)?, &DemandModel::centered(1.0)?, 400, &cfg, exec)?;
    let exact = spitzer_exact(1.0, 1.0, 400)?;
    let ok = (e.mean - exact).abs() <= 3.0 * e.stderr;
    Ok((ok, format!("{:.5} ± {:.5} vs {exact:.5}", e.mean, e.stderr)))
}

fn thread_independence(paths: u64, seed: u64, exec: &Pooled) -> Check {
    let cfg = SimConfig::new(paths.min(5_000), seed).with_antithetic(true);
    let policy = SupplyPolicy::new(0.5, 0.7)?;
    let demand = DemandModel::centered(1.0)?;
    let pooled = sample_ln(&policy, &demand, 300, &cfg, exec)?;
    let single = sample_ln(&policy, &demand, 300, &cfg, &Sequential)?;
    let ok = pooled.mean.to_bits() == single.mean.to_bits() && pooled.stderr.to_bits() == single.stderr.to_bits();
    Ok((ok, format!("{} worker threads vs 1", exec.threads())))
}

pub fn run(args: &SelfcheckArgs, exec: &Pooled) -> Result<Outcome, CliError> {
    let checks: Vec<(&str, Check)> = vec![
        ("loss_function", loss_function()),
        ("zero_drift_envelope", zero_drift_envelope()),
        ("linear_drift_limit", linear_drift_limit()),
        ("envelope_ordering", envelope_ordering()),
        ("ratio_certificate", ratio_certificate()),
        ("tail_bound_formulas", tail_bound_formulas()),
        ("equivalence_limit", equivalence_limit()),
        ("linear_drift_simulation", linear_drift_simulation(args.paths, args.seed, exec)),
        ("thread_independence", thread_independence(args.paths, args.seed, exec)),
    ];
    let mut table = Table::new(&["name", "passed", "detail"]);
    let mut entries: Vec<Value> = Vec::new();
    let mut failed = 0;
    for (name, outcome) in checks {
        let (passed, detail) = match outcome {
            Ok(pair) => pair,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        table.push(vec![name.into(), passed.to_string(), detail.clone()]);
        entries.push(json!({ "name": name, "passed": passed, "detail": detail }));
    }
    let total = entries.len();
    let mut warnings = Vec::new();
    if failed > 0 {
        warnings.push(format!("selfcheck: {failed} of {total} checks failed"));
    }
    Ok(Outcome {
        result: json!({ "checks": entries, "passed": total - failed, "failed": failed }),
        table,
        seed: args.seed,
        warnings,
        exit_code: if failed > 0 { 4 } else { 0 },
    })
}
