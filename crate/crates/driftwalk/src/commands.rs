//! Subcommands: flag definitions and the computation behind each.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use driftwalk_core::asymptotics::{bound_envelope, spitzer_closed, spitzer_exact};
use driftwalk_core::hitting::hitting_ln_estimate;
use driftwalk_core::inventory::{DemandModel, SupplyPolicy};
use driftwalk_core::optimizer::{
    apply_holding, backorder_solve, brownian_optimize, equivalence_curve, ratio_report, solve_lower, solve_upper,
    CostParams, RatioReport, Solution,
};
use driftwalk_core::simulate::{rho_slope, sample_ln, sample_rho_grid, McEstimate, SimConfig, OU_HORIZON};

use crate::error::CliError;
use crate::exec::Pooled;
use crate::record::{float_text, num, Table};
use crate::selfcheck;

#[derive(Parser, Debug)]
#[command(
    name = "driftwalk",
    version,
    about = "Supply plans against Gaussian demand: lost-sales bounds, simulation and cost optimization",
    long_about = None,
    after_help = "Each run prints one JSON record {command, params, result, seed, version, wall_time} on stdout.\n\
                  Exit codes: 0 ok, 1 I/O failure, 2 usage error, 3 domain error, 4 numerical failure.\n\
                  DRIFTWALK_THREADS caps the worker count; results do not depend on it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Regime-dependent lower and upper bounds on expected lost sales.
    #[command(args_override_self = true, after_help = "CSV columns: alpha,kappa,sigma,n,lower,upper,regime,growth_order,lower_is_fallback")]
    Bounds(BoundsArgs),
    /// Expected lost sales under a linear drift, as a sum or in integral form.
    #[command(args_override_self = true, after_help = "CSV columns: kappa,sigma,n,form,value")]
    Spitzer(SpitzerArgs),
    /// Monte Carlo estimate of expected lost sales for a supply policy.
    #[command(args_override_self = true, after_help = "CSV columns: alpha,kappa,sigma,n,mean,stderr,paths,seed")]
    Simulate(SimulateArgs),
    /// Monte Carlo estimate of the Brownian loss rate rho(kappa).
    #[command(args_override_self = true, after_help = "CSV columns: kappa,mean,stderr,slope,slope_stderr (slope columns empty without --slope)")]
    Rho(RhoArgs),
    /// Lost-sales estimate via passage times of the time-changed process.
    #[command(args_override_self = true, after_help = "CSV columns (one row per x node): x,m1,m2,m3,band_low,band_high,empirical,empirical_stderr")]
    Hitting(HittingArgs),
    /// Safety-stock factor minimizing a surrogate or simulated cost.
    #[command(
        args_override_self = true,
        after_help = "CSV columns: method,kappa,objective,stderr; with --method brownian one row per grid point: kappa,objective,stderr"
    )]
    Optimize(OptimizeArgs),
    /// Lost-sales versus backorder optimal costs as the penalty grows.
    #[command(args_override_self = true, after_help = "CSV columns: p,lost_sales,backorder,ratio,kappa_lost_sales,kappa_backorder")]
    Equivalence(EquivalenceArgs),
    /// Runs the built-in invariant suite.
    #[command(args_override_self = true, after_help = "CSV columns: name,passed,detail")]
    Selfcheck(SelfcheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::Spitzer(_) => "spitzer",
            Command::Simulate(_) => "simulate",
            Command::Rho(_) => "rho",
            Command::Hitting(_) => "hitting",
            Command::Optimize(_) => "optimize",
            Command::Equivalence(_) => "equivalence",
            Command::Selfcheck(_) => "selfcheck",
        }
    }
}

/// Flags that steer input and output but never the result.
#[derive(Args, Debug, Clone, Default)]
pub struct Io {
    /// Write the tabular rows to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON file whose keys mirror the flags; flags on the command line win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

/// Comma-separated floats.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

fn parse_float_list(raw: &str) -> Result<FloatList, String> {
    let values: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(FloatList(v)),
        _ => Err(format!("expected comma-separated numbers, got {raw:?}")),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    /// Safety-supply exponent in [0, 1].
    #[arg(long)]
    pub alpha: f64,
    /// Safety-supply factor.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Demand volatility per period.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Horizon in periods.
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct SpitzerArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub n: u64,
    /// Evaluate the sum instead of its integral approximation.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Mean demand per period; it cancels from lost sales.
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pair every path with its mirror image.
    #[arg(long)]
    pub antithetic: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct RhoArgs {
    /// One or more drift factors, comma-separated; all share random numbers.
    #[arg(long, value_parser = parse_float_list, allow_hyphen_values = true)]
    pub kappa: FloatList,
    /// Random-walk steps approximating the unit interval.
    #[arg(long, default_value_t = 1_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub antithetic: bool,
    /// Also estimate the derivative by a central difference.
    #[arg(long)]
    pub slope: bool,
    /// Half-width of the central difference.
    #[arg(long, default_value_t = 0.05)]
    pub slope_step: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct HittingArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub n: u64,
    /// Quadrature nodes over the level x.
    #[arg(long, default_value_t = driftwalk_core::hitting::DEFAULT_NODES)]
    pub nodes: usize,
    /// Passage paths per node.
    #[arg(long, default_value_t = 2_000)]
    pub paths: u64,
    /// Euler steps over the passage-time horizon.
    #[arg(long, default_value_t = 1_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub antithetic: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Lower,
    Upper,
    UpperUnconstrained,
    Brownian,
    Backorder,
}

#[derive(Args, Debug, Serialize)]
pub struct OptimizeArgs {
    /// Production cost per unit.
    #[arg(long)]
    pub c: f64,
    /// Lost-sales penalty per unit.
    #[arg(long)]
    pub p: f64,
    /// Holding cost over the horizon (lost-sales model), already rescaled.
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    /// Backlog penalty per unit for --method backorder; defaults to p.
    #[arg(long)]
    pub b: Option<f64>,
    /// Holding cost over the horizon (backorder model).
    #[arg(long, default_value_t = 0.0)]
    pub h_prime: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub n: u64,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Paths per grid point for --method brownian.
    #[arg(long, default_value_t = 10_000)]
    pub paths: u64,
    /// Random-walk steps for --method brownian.
    #[arg(long, default_value_t = 1_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct EquivalenceArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    /// Ascending lost-sales penalties, comma-separated.
    #[arg(long, value_parser = parse_float_list)]
    pub p_list: FloatList,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub n: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct SelfcheckArgs {
    /// Paths for the simulation checks.
    #[arg(long, default_value_t = 20_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub table: Table,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl Command {
    pub fn params(&self) -> Map<String, Value> {
        use crate::record::params_of;
        match self {
            Command::Bounds(a) => params_of(a),
            Command::Spitzer(a) => params_of(a),
            Command::Simulate(a) => params_of(a),
            Command::Rho(a) => params_of(a),
            Command::Hitting(a) => params_of(a),
            Command::Optimize(a) => params_of(a),
            Command::Equivalence(a) => params_of(a),
            Command::Selfcheck(a) => params_of(a),
        }
    }

    pub fn io(&self) -> &Io {
        match self {
            Command::Bounds(a) => &a.io,
            Command::Spitzer(a) => &a.io,
            Command::Simulate(a) => &a.io,
            Command::Rho(a) => &a.io,
            Command::Hitting(a) => &a.io,
            Command::Optimize(a) => &a.io,
            Command::Equivalence(a) => &a.io,
            Command::Selfcheck(a) => &a.io,
        }
    }

    pub fn run(&self, exec: &Pooled) -> Result<Outcome, CliError> {
        match self {
            Command::Bounds(a) => bounds(a),
            Command::Spitzer(a) => spitzer(a),
            Command::Simulate(a) => simulate(a, exec),
            Command::Rho(a) => rho(a, exec),
            Command::Hitting(a) => hitting(a, exec),
            Command::Optimize(a) => optimize(a, exec),
            Command::Equivalence(a) => equivalence(a),
            Command::Selfcheck(a) => selfcheck::run(a, exec),
        }
    }
}

fn text(x: f64) -> String {
    float_text(x)
}

fn estimate_json(e: &McEstimate) -> Value {
    json!({ "mean": num(e.mean), "stderr": num(e.stderr), "paths": e.paths, "seed": e.seed })
}

fn bounds(a: &BoundsArgs) -> Result<Outcome, CliError> {
    let e = bound_envelope(a.alpha, a.kappa, a.sigma, a.n)?;
    let mut table = Table::new(&["alpha", "kappa", "sigma", "n", "lower", "upper", "regime", "growth_order", "lower_is_fallback"]);
    table.push(vec![
        text(a.alpha),
        text(a.kappa),
        text(a.sigma),
        a.n.to_string(),
        text(e.lower),
        text(e.upper),
        e.regime.label().into(),
        e.growth_order.label().into(),
        e.lower_is_fallback.to_string(),
    ]);
    let mut warnings = Vec::new();
    if e.lower_is_fallback {
        warnings.push("note: the asymptotic lower bound does not apply at this horizon; the Jensen bound is reported".into());
    }
    if e.upper.is_infinite() {
        warnings.push("note: the upper-bound constant exceeds the floating-point range; upper is reported as inf".into());
    }
    Ok(Outcome {
        result: json!({
            "lower": num(e.lower),
            "upper": num(e.upper),
            "regime": e.regime.label(),
            "growth_order": e.growth_order.label(),
            "lower_is_fallback": e.lower_is_fallback,
        }),
        table,
        warnings,
        ..Outcome::default()
    })
}

fn spitzer(a: &SpitzerArgs) -> Result<Outcome, CliError> {
    let (value, form) = if a.exact {
        (spitzer_exact(a.kappa, a.sigma, a.n)?, "exact")
    } else {
        (spitzer_closed(a.kappa, a.sigma, a.n)?, "closed")
    };
    let mut table = Table::new(&["kappa", "sigma", "n", "form", "value"]);
    table.push(vec![text(a.kappa), text(a.sigma), a.n.to_string(), form.into(), text(value)]);
    Ok(Outcome { result: json!({ "value": num(value), "form": form }), table, ..Outcome::default() })
}

fn simulate(a: &SimulateArgs, exec: &Pooled) -> Result<Outcome, CliError> {
    let policy = SupplyPolicy::new(a.alpha, a.kappa)?;
    let demand = DemandModel::new(a.mu, a.sigma)?;
    let cfg = SimConfig::new(a.paths, a.seed).with_antithetic(a.antithetic);
    let e = sample_ln(&policy, &demand, a.n, &cfg, exec)?;
    let root_n = (a.n as f64).sqrt();
    let mut table = Table::new(&["alpha", "kappa", "sigma", "n", "mean", "stderr", "paths", "seed"]);
    table.push(vec![
        text(a.alpha),
        text(a.kappa),
        text(a.sigma),
        a.n.to_string(),
        text(e.mean),
        text(e.stderr),
        e.paths.to_string(),
        e.seed.to_string(),
    ]);
    let mut result = estimate_json(&e);
    result["antithetic"] = Value::Bool(a.antithetic);
    result["mean_over_sqrt_n"] = num(e.mean / root_n);
    result["stderr_over_sqrt_n"] = num(e.stderr / root_n);
    Ok(Outcome { result, table, seed: a.seed, ..Outcome::default() })
}

fn rho(a: &RhoArgs, exec: &Pooled) -> Result<Outcome, CliError> {
    let cfg = SimConfig::new(a.paths, a.seed).with_steps(a.steps).with_antithetic(a.antithetic);
    if a.steps < 100 {
        return Err(driftwalk_core::Error::Domain { what: "rho needs steps >= 100", value: a.steps as f64 }.into());
    }
    let estimates = sample_rho_grid(&a.kappa.0, &cfg, exec)?;
    let mut table = Table::new(&["kappa", "mean", "stderr", "slope", "slope_stderr"]);
    let mut points = Vec::new();
    for (kappa, e) in a.kappa.0.iter().zip(&estimates) {
        let mut point = json!({ "kappa": num(*kappa), "mean": num(e.mean), "stderr": num(e.stderr) });
        let mut row = vec![text(*kappa), text(e.mean), text(e.stderr), String::new(), String::new()];
        if a.slope {
            let s = rho_slope(*kappa, a.slope_step, &cfg, exec)?;
            point["slope"] = num(s.mean);
            point["slope_stderr"] = num(s.stderr);
            row[3] = text(s.mean);
            row[4] = text(s.stderr);
        }
        points.push(point);
        table.push(row);
    }
    Ok(Outcome {
        result: json!({ "paths": a.paths, "steps": a.steps, "points": points }),
        table,
        seed: a.seed,
        ..Outcome::default()
    })
}

fn hitting(a: &HittingArgs, exec: &Pooled) -> Result<Outcome, CliError> {
    let cfg = SimConfig::new(a.paths, a.seed).with_steps(a.steps).with_antithetic(a.antithetic);
    let e = hitting_ln_estimate(a.kappa, a.sigma, a.n, a.nodes, &cfg, exec)?;
    let mut table = Table::new(&["x", "m1", "m2", "m3", "band_low", "band_high", "empirical", "empirical_stderr"]);
    for node in &e.nodes {
        table.push(vec![
            text(node.x),
            text(node.moments.m1),
            text(node.moments.m2),
            text(node.moments.m3),
            text(node.band.low),
            text(node.band.high),
            text(node.empirical),
            text(node.empirical_stderr),
        ]);
    }
    let mut warnings = Vec::new();
    if e.censored > 0 {
        warnings.push(format!(
            "warning: {} simulated passage paths reached the cap u = {OU_HORIZON} without passing; their times were set to the cap",
            e.censored
        ));
    }
    Ok(Outcome {
        result: json!({
            "mean": num(e.mean),
            "half_width": num(e.half_width),
            "stderr": num(e.stderr),
            "uncertainty": num(e.uncertainty()),
            "empirical": num(e.empirical),
            "x_max": num(e.x_max),
            "nodes": e.nodes.len(),
            "censored": e.censored,
            "paths": e.paths,
            "seed": e.seed,
            "conventions": {
                "passage_level": num(e.level),
                "passage_level_rule": "kappa, simulated at unit sigma",
                "level_kappa_over_sqrt_sigma": num(a.kappa / a.sigma.sqrt()),
                "estimate_scaling": "sigma * sqrt(N) times the unit-sigma integral",
            },
        }),
        table,
        seed: a.seed,
        warnings,
        ..Outcome::default()
    })
}

fn solution_json(s: &Solution) -> Value {
    let mut v = json!({
        "method": s.method.label(),
        "kappa": num(s.kappa),
        "objective": num(s.objective),
        "alpha": num(s.alpha),
    });
    if let Some(se) = s.stderr {
        v["stderr"] = num(se);
    }
    v
}

fn ratio_json(r: &RatioReport) -> Value {
    json!({
        "v_lower": num(r.v_lower),
        "v_upper": num(r.v_upper),
        "ratio": num(r.ratio),
        "ratio_lower_cert": num(r.ratio_lower_cert),
        "ratio_upper_cert": num(r.ratio_upper_cert),
        "kappa_lower": num(r.kappa_lower),
        "kappa_upper": num(r.kappa_upper),
    })
}

fn optimize(a: &OptimizeArgs, exec: &Pooled) -> Result<Outcome, CliError> {
    let costs = CostParams::new(a.c, a.p, a.h, a.b.unwrap_or(a.p), a.h_prime)?;
    let held = apply_holding(&costs);
    // the certificate only exists for a finite lower surrogate
    let certificate = || -> Result<Option<Value>, CliError> {
        if held.c > 0.0 && held.p > held.c {
            Ok(Some(ratio_json(&ratio_report(&held, a.sigma, a.n)?)))
        } else {
            Ok(None)
        }
    };
    let mut table = Table::new(&["method", "kappa", "objective", "stderr"]);
    let (solution, mut result) = match a.method {
        MethodArg::Lower => {
            let s = solve_lower(&held, a.sigma, a.n)?;
            (s, solution_json(&s))
        }
        MethodArg::Upper | MethodArg::UpperUnconstrained => {
            let s = solve_upper(&held, a.sigma, a.n, a.method == MethodArg::Upper)?;
            (s, solution_json(&s))
        }
        MethodArg::Backorder => {
            let s = backorder_solve(&costs, a.sigma, a.n)?;
            (s, solution_json(&s))
        }
        MethodArg::Brownian => {
            let cfg = SimConfig::new(a.paths, a.seed).with_steps(a.steps);
            let report = brownian_optimize(&held, a.sigma, a.n, &cfg, exec)?;
            let mut v = solution_json(&report.solution);
            v["rho"] = estimate_json(&report.rho);
            v["rho_slope"] = estimate_json(&report.rho_slope);
            v["kappa_lower"] = num(report.kappa_lower);
            v["kappa_upper"] = num(report.kappa_upper);
            table = Table::new(&["kappa", "objective", "stderr"]);
            for g in &report.grid {
                table.push(vec![text(g.kappa), text(g.objective), text(g.stderr)]);
            }
            (report.solution, v)
        }
    };
    if a.method != MethodArg::Brownian {
        table.push(vec![
            solution.method.label().into(),
            text(solution.kappa),
            text(solution.objective),
            solution.stderr.map(text).unwrap_or_default(),
        ]);
    }
    if a.method != MethodArg::Backorder {
        result["costs"] = json!({ "c": num(held.c), "p": num(held.p) });
        if let Some(cert) = certificate()? {
            result["ratio_report"] = cert;
        }
    }
    let seed = if a.method == MethodArg::Brownian { a.seed } else { 0 };
    Ok(Outcome { result, table, seed, ..Outcome::default() })
}

fn equivalence(a: &EquivalenceArgs) -> Result<Outcome, CliError> {
    let curve = equivalence_curve(a.c, a.h, &a.p_list.0, a.sigma, a.n)?;
    let mut table = Table::new(&["p", "lost_sales", "backorder", "ratio", "kappa_lost_sales", "kappa_backorder"]);
    let mut points = Vec::new();
    for pt in &curve {
        table.push(vec![
            text(pt.p),
            text(pt.lost_sales),
            text(pt.backorder),
            text(pt.ratio),
            text(pt.kappa_lost_sales),
            text(pt.kappa_backorder),
        ]);
        points.push(json!({
            "p": num(pt.p),
            "lost_sales": num(pt.lost_sales),
            "backorder": num(pt.backorder),
            "ratio": num(pt.ratio),
            "kappa_lost_sales": num(pt.kappa_lost_sales),
            "kappa_backorder": num(pt.kappa_backorder),
        }));
    }
    Ok(Outcome { result: json!({ "points": points }), table, ..Outcome::default() })
}
