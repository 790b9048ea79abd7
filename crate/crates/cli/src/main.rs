//! `ewsd`: secrecy metrics of coset codes over the binary erasure wiretap
//! channel.
//!
//! Exit codes: 0 success, 1 internal or verification failure, 2 invalid
//! input, 3 resource limit.

/// `println!` that exits quietly once the reader of stdout has gone away.
macro_rules! out {
    ($($arg:tt)*) => {
        $crate::write_stdout(&format!($($arg)*))
    };
}

mod analyze;
mod bench;
mod construct;
mod input;
mod probe;
mod simulate;
mod verify;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ewsd", version, about = "Exact, subspace and Monte Carlo secrecy metrics for coset codes")]
struct Cli {
    /// Worker threads for enumeration, sampling and simulation. Results do not
    /// depend on it.
    #[arg(long, env = "EWSD_PARALLEL", global = true)]
    parallel: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a secrecy metric by one or more methods.
    Analyze(analyze::Args),
    /// Write a uniform or subspace exclusion code.
    Construct(construct::Args),
    /// Run the oracle-equivalence and identity suites.
    Verify(verify::Args),
    /// Probe local or global optimality of a construction.
    Probe(probe::Args),
    /// Monte Carlo estimate of a metric.
    Simulate(simulate::Args),
    /// Time the enumeration and subspace paths over a grid.
    Bench(bench::Args),
}

/// A failed command and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn resource(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<ewsd::Error> for Failure {
    fn from(e: ewsd::Error) -> Self {
        let code = match e {
            ewsd::Error::Resource(_) => 3,
            ewsd::Error::Usage(_) | ewsd::Error::Realizability(_) | ewsd::Error::Domain(_) => 2,
        };
        Self { code, message: e.to_string() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn write_stdout(line: &str) {
    use std::io::{ErrorKind, Write};
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = writeln!(stdout, "{line}").and_then(|()| stdout.flush()) {
        if e.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write output: {e}");
        std::process::exit(1);
    }
}

pub type CmdResult = Result<(), Failure>;

fn run(cli: Cli) -> CmdResult {
    if let Some(threads) = cli.parallel {
        if threads == 0 {
            return Err(Failure::usage("--parallel must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::failed(format!("cannot start worker pool: {e}")))?;
    }
    match cli.command {
        Command::Analyze(a) => analyze::run(a),
        Command::Construct(a) => construct::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Probe(a) => probe::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Bench(a) => bench::run(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
