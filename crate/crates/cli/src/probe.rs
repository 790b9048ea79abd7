//! `ewsd probe`: local and global optimality checks of a construction.

use clap::ValueEnum;
use ewsd::optprobe::{chi2_global_probe, stationarity_probe, ConstraintSet, Construction};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{emit, to_value};
use crate::{CmdResult, Failure};

/// Projected gradient norm below which a point counts as stationary.
const STATIONARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionArg {
    Uniform,
    Sec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Equivocation,
    Chi2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Stationarity,
    SphereSample,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    #[arg(long, value_enum)]
    construction: ConstructionArg,
    /// Excluded subspace dimension for `--construction sec`.
    #[arg(long, required_if_eq("construction", "sec"))]
    u: Option<usize>,
    #[arg(long)]
    kappa: usize,
    /// Blocklength; defaults to `2^kappa - 1`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "equivocation")]
    metric: MetricArg,
    /// Defaults to stationarity for equivocation and sphere-sample for chi2.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Feasible samples for sphere-sample.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Tangent directions for stationarity.
    #[arg(long, default_value_t = 64)]
    directions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop the minimum-distance constraint around exclusion codes.
    #[arg(long)]
    no_min_dist: bool,
}

fn construction(args: &Args) -> Result<Construction, Failure> {
    match (args.construction, args.u) {
        (ConstructionArg::Uniform, None) => Ok(Construction::Uniform),
        (ConstructionArg::Uniform, Some(_)) => Err(Failure::usage("--u applies to --construction sec only")),
        (ConstructionArg::Sec, Some(u)) if u < args.kappa => Ok(Construction::Sec(u)),
        (ConstructionArg::Sec, Some(u)) => Err(Failure::usage(format!("u = {u} must be below kappa = {}", args.kappa))),
        (ConstructionArg::Sec, None) => Err(Failure::usage("--construction sec requires --u")),
    }
}

fn stationarity(args: &Args, c: Construction, n: usize) -> Result<Value, Failure> {
    if args.metric != MetricArg::Equivocation {
        return Err(Failure::usage("stationarity probes use the equivocation gradient; use --metric equivocation"));
    }
    let q = c.q(args.kappa)?;
    // Zero entries of an exclusion code make nonnegativity active there; the
    // local argument does not use it, so every sphere direction is probed.
    let constraints = match c {
        Construction::Uniform => ConstraintSet::reduced_simplex(),
        Construction::Sec(u) => ConstraintSet { nonnegativity: false, ..ConstraintSet::sphere(u) },
    };
    let r = stationarity_probe(&q, n, args.epsilon, &constraints, args.directions, args.seed)?;
    let stationary = r.projected_gradient_norm <= STATIONARY_TOL;
    let mut v = to_value(&r);
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("construction".into(), to_value(&c));
    obj.insert("n".into(), json!(n));
    obj.insert("epsilon".into(), json!(args.epsilon));
    obj.insert("samples".into(), Value::Null);
    obj.insert("violations".into(), Value::Null);
    obj.insert("min_margin".into(), Value::Null);
    obj.insert("stationary".into(), json!(stationary));
    obj.insert("local_minimum".into(), json!(stationary && r.min_curvature > 0.0 && r.min_curvature_analytic > 0.0));
    Ok(v)
}

fn sphere_sample(args: &Args, c: Construction, n: usize) -> Result<Value, Failure> {
    if args.metric != MetricArg::Chi2 {
        return Err(Failure::usage("sampling probes compare the chi2 divergence; use --metric chi2"));
    }
    let r = chi2_global_probe(args.kappa, n, args.epsilon, c, !args.no_min_dist, args.samples, args.seed)?;
    let mut v = to_value(&r);
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("projected_gradient_norm".into(), Value::Null);
    obj.insert("min_curvature".into(), Value::Null);
    Ok(v)
}

pub fn run(args: Args) -> CmdResult {
    let c = construction(&args)?;
    if args.kappa >= usize::BITS as usize - 1 {
        return Err(Failure::resource(format!("kappa = {} is too large", args.kappa)));
    }
    let n = args.n.unwrap_or((1 << args.kappa) - 1);
    let mode = args.mode.unwrap_or(match args.metric {
        MetricArg::Equivocation => Mode::Stationarity,
        MetricArg::Chi2 => Mode::SphereSample,
    });
    let body = match mode {
        Mode::Stationarity => stationarity(&args, c, n)?,
        Mode::SphereSample => sphere_sample(&args, c, n)?,
    };
    emit(&args, body);
    Ok(())
}
