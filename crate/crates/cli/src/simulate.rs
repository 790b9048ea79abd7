//! `ewsd simulate`: Monte Carlo estimate of a metric.

use std::path::PathBuf;

use clap::ValueEnum;
use ewsd::mcsim::{estimate_chi2, estimate_equivocation};
use serde::Serialize;

use crate::input::{emit, load_generator, to_value};
use crate::CmdResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Equivocation,
    Chi2,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Generator matrix file, one row per line.
    #[arg(long)]
    generator: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "equivocation")]
    metric: MetricArg,
}

pub fn run(args: Args) -> CmdResult {
    let g = load_generator(&args.generator)?;
    let e = match args.metric {
        MetricArg::Equivocation => estimate_equivocation(&g, args.epsilon, args.trials, args.seed)?,
        MetricArg::Chi2 => estimate_chi2(&g, args.epsilon, args.trials, args.seed)?,
    };
    emit(&args, to_value(&e));
    Ok(())
}
