//! `ewsd analyze`: one metric by one or more methods.

use std::path::PathBuf;

use clap::ValueEnum;
use ewsd::codes::{from_generator, to_generator, CodeDefinition};
use ewsd::gf2::GeneratorMatrix;
use ewsd::mcsim::{estimate_chi2, estimate_equivocation};
use ewsd::oracle::{chi2_oracle, equivocation_loss_oracle, total_variation_oracle, ChannelParams};
use ewsd::sdmetrics::{chi2_sd, equivocation_loss_sd, HyperplanePath};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{channel, emit, load_generator, load_q, to_value};
use crate::{CmdResult, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Equivocation,
    Chi2,
    Tv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Oracle,
    Subspace,
    Montecarlo,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Generator matrix file, one row per line.
    #[arg(long, required_unless_present = "q", conflicts_with_all = ["q", "n"])]
    generator: Option<PathBuf>,
    /// Vector-fraction file `{"kappa": K, "q": [...]}`.
    #[arg(long, requires = "n")]
    q: Option<PathBuf>,
    /// Blocklength for `--q`.
    #[arg(long)]
    n: Option<usize>,
    /// Erasure probability of each position.
    #[arg(long, required_unless_present = "mu", conflicts_with = "mu")]
    epsilon: Option<f64>,
    /// Exact number of revealed positions.
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long, value_enum)]
    metric: MetricArg,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Monte Carlo seed; required for `--method montecarlo`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

/// One computed value, in a shape shared by every method.
struct Row {
    method: &'static str,
    value: f64,
    std_error: Option<f64>,
    runtime_ms: Option<f64>,
    json: Value,
}

struct Code {
    q: CodeDefinition,
    g: Option<GeneratorMatrix>,
    n: usize,
}

fn load(args: &Args) -> Result<Code, Failure> {
    if let Some(path) = &args.generator {
        let g = load_generator(path)?;
        return Ok(Code { q: from_generator(&g)?, n: g.n(), g: Some(g) });
    }
    let (Some(path), Some(n)) = (&args.q, args.n) else {
        return Err(Failure::usage("give --generator, or --q with --n"));
    };
    Ok(Code { q: load_q(path)?, g: None, n })
}

impl Code {
    /// The generator, realized from `q` when not given directly.
    fn generator(&mut self) -> Result<&GeneratorMatrix, Failure> {
        if self.g.is_none() {
            self.g = Some(to_generator(&self.q, self.n)?);
        }
        Ok(self.g.as_ref().expect("just set"))
    }
}

fn oracle(code: &mut Code, metric: MetricArg, params: ChannelParams) -> Result<Row, Failure> {
    let g = code.generator()?;
    let r = match metric {
        MetricArg::Equivocation => equivocation_loss_oracle(g, params)?,
        MetricArg::Chi2 => chi2_oracle(g, params)?,
        MetricArg::Tv => total_variation_oracle(g, params)?,
    };
    Ok(row("oracle", &r))
}

fn subspace(code: &Code, metric: MetricArg, params: ChannelParams) -> Result<Row, Failure> {
    let q = code.q.q();
    let r = match metric {
        MetricArg::Equivocation => equivocation_loss_sd(q, params)?,
        MetricArg::Chi2 => chi2_sd(q, params, HyperplanePath::Transform)?,
        MetricArg::Tv => return Err(Failure::usage("total variation is computed by the oracle only")),
    };
    Ok(row("subspace", &r))
}

fn montecarlo(code: &mut Code, args: &Args) -> Result<Row, Failure> {
    let seed = args.seed.ok_or_else(|| Failure::usage("--method montecarlo requires --seed"))?;
    let epsilon = args
        .epsilon
        .ok_or_else(|| Failure::usage("Monte Carlo estimation needs --epsilon, not --mu"))?;
    let trials = args.trials;
    let g = code.generator()?;
    let e = match args.metric {
        MetricArg::Equivocation => estimate_equivocation(g, epsilon, trials, seed)?,
        MetricArg::Chi2 => estimate_chi2(g, epsilon, trials, seed)?,
        MetricArg::Tv => return Err(Failure::usage("total variation is computed by the oracle only")),
    };
    Ok(Row {
        method: "montecarlo",
        value: e.value,
        std_error: Some(e.std_error),
        runtime_ms: None,
        json: to_value(&e),
    })
}

fn row(method: &'static str, r: &ewsd::oracle::MetricResult) -> Row {
    Row {
        method,
        value: r.value,
        std_error: None,
        runtime_ms: Some(r.runtime.as_secs_f64() * 1e3),
        json: to_value(r),
    }
}

pub fn run(args: Args) -> CmdResult {
    let mut code = load(&args)?;
    let params = channel(code.n, args.epsilon, args.mu)?;
    let mut rows = Vec::new();
    let mut notes: Vec<String> = Vec::new();
    match args.method {
        MethodArg::Oracle => rows.push(oracle(&mut code, args.metric, params)?),
        MethodArg::Subspace => rows.push(subspace(&code, args.metric, params)?),
        MethodArg::Montecarlo => rows.push(montecarlo(&mut code, &args)?),
        MethodArg::All => {
            match oracle(&mut code, args.metric, params) {
                Ok(r) => rows.push(r),
                // An unrealizable q has no generator; the other methods still apply.
                Err(f) if code.g.is_none() && f.code == 2 => notes.push(format!("oracle skipped: {f}")),
                Err(f) => return Err(f),
            }
            if args.metric == MetricArg::Tv {
                notes.push("subspace and montecarlo skipped: total variation is oracle-only".into());
            } else {
                rows.push(subspace(&code, args.metric, params)?);
                if args.seed.is_none() || args.epsilon.is_none() {
                    notes.push("montecarlo skipped: needs --seed and --epsilon".into());
                } else {
                    rows.push(montecarlo(&mut code, &args)?);
                }
            }
        }
    }

    let mut deltas = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            deltas.push((a.method, b.method, (a.value - b.value).abs()));
        }
    }

    match args.format {
        Format::Json => emit(
            &args,
            json!({
                "results": rows.iter().map(|r| r.json.clone()).collect::<Vec<_>>(),
                "deltas": deltas
                    .iter()
                    .map(|(a, b, d)| json!({"a": a, "b": b, "abs_delta": d}))
                    .collect::<Vec<_>>(),
                "notes": notes,
            }),
        ),
        Format::Csv => {
            crate::input::echo_config(&args);
            for note in &notes {
                eprintln!("note: {note}");
            }
            let metric = to_value(&args.metric);
            let metric = metric.as_str().unwrap_or_default();
            out!("metric,method,value,std_error,runtime_ms");
            for r in &rows {
                out!(
                    "{metric},{},{},{},{}",
                    r.method,
                    r.value,
                    r.std_error.map(|x| x.to_string()).unwrap_or_default(),
                    r.runtime_ms.map(|x| x.to_string()).unwrap_or_default()
                );
            }
            for (a, b, d) in &deltas {
                out!("{metric},delta:{a}-{b},{d:e},,");
            }
        }
    }
    Ok(())
}
