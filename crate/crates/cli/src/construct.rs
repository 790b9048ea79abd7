//! `ewsd construct`: uniform and subspace exclusion codes.

use std::fs;
use std::path::PathBuf;

use clap::ValueEnum;
use ewsd::codes::{subspace_exclusion, to_generator, uniform_fraction};
use serde::Serialize;

use crate::input::echo_config;
use crate::{CmdResult, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeType {
    Uniform,
    Sec,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    #[arg(long)]
    kappa: usize,
    #[arg(long = "type", value_enum)]
    code_type: CodeType,
    /// Dimension of the excluded subspace, `u < kappa`.
    #[arg(long, required_if_eq("code_type", "sec"))]
    u: Option<usize>,
    /// Write the generator matrix at the natural blocklength instead of `q`.
    #[arg(long)]
    emit_generator: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn run(args: Args) -> CmdResult {
    echo_config(&args);
    let q = match (args.code_type, args.u) {
        (CodeType::Uniform, None) => uniform_fraction(args.kappa)?,
        (CodeType::Uniform, Some(_)) => return Err(Failure::usage("--u applies to --type sec only")),
        (CodeType::Sec, Some(u)) => subspace_exclusion(args.kappa, u)?,
        (CodeType::Sec, None) => return Err(Failure::usage("--type sec requires --u")),
    };
    let text = if args.emit_generator {
        let n = q
            .natural_n()
            .ok_or_else(|| Failure::usage("construction has no natural blocklength"))?;
        to_generator(&q, n)?.to_text()
    } else {
        let mut s = q.to_json();
        s.push('\n');
        s
    };
    match &args.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?,
        None => out!("{}", text.trim_end_matches('\n')),
    }
    Ok(())
}
