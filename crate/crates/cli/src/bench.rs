//! `ewsd bench`: runtime of the enumeration and subspace paths over a grid.

use std::ops::RangeInclusive;
use std::time::Instant;

use ewsd::codes::from_generator;
use ewsd::gf2::GeneratorMatrix;
use ewsd::oracle::{chi2_oracle, equivocation_loss_oracle, ChannelParams, MAX_ORACLE_N};
use ewsd::sdmetrics::{chi2_sd, equivocation_loss_sd, HyperplanePath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::input::echo_config;
use crate::{CmdResult, Failure};

const MAX_BENCH_KAPPA: usize = 8;

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// Inclusive κ range `A..B`.
    #[arg(long, value_parser = parse_range)]
    kappa_range: (usize, usize),
    /// Inclusive blocklength range `C..D`.
    #[arg(long, value_parser = parse_range)]
    n_range: (usize, usize),
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Timed runs per cell; the median is reported.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Seed for the random generator matrices.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

fn range((a, b): (usize, usize)) -> RangeInclusive<usize> {
    a..=b
}

fn median_ms(repeats: usize, mut f: impl FnMut() -> Result<(), Failure>) -> Result<f64, Failure> {
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        f()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    Ok(times[times.len() / 2])
}

struct Cell {
    kappa: usize,
    n: usize,
    metric: &'static str,
    oracle_ms: f64,
    subspace_ms: f64,
}

/// Smallest n from which the subspace path stays faster for the rest of the range.
fn crossover(cells: &[Cell], kappa: usize, metric: &str) -> Option<usize> {
    let mut row: Vec<&Cell> = cells.iter().filter(|c| c.kappa == kappa && c.metric == metric).collect();
    row.sort_by_key(|c| c.n);
    let mut at = None;
    for c in row.iter().rev() {
        if c.subspace_ms < c.oracle_ms {
            at = Some(c.n);
        } else {
            break;
        }
    }
    at
}

pub fn run(args: Args) -> CmdResult {
    echo_config(&args);
    if args.kappa_range.0 == 0 || args.n_range.0 == 0 || args.repeats == 0 {
        return Err(Failure::usage("kappa, n and repeats must be positive"));
    }
    if args.kappa_range.1 > MAX_BENCH_KAPPA {
        return Err(Failure::resource(format!("kappa is capped at {MAX_BENCH_KAPPA}")));
    }
    if args.n_range.1 > MAX_ORACLE_N {
        return Err(Failure::resource(format!("n is capped at {MAX_ORACLE_N}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut cells = Vec::new();
    out!("kappa,n,method,metric,median_runtime_ms");
    for kappa in range(args.kappa_range) {
        for n in range(args.n_range) {
            let cols = (0..n).map(|_| rng.random_range(0..1u32 << kappa)).collect();
            let g = GeneratorMatrix::new(kappa, cols)?;
            let q = from_generator(&g)?.into_vec();
            let params = ChannelParams::epsilon(n, args.epsilon)?;
            let timings = [
                (
                    "equivocation",
                    median_ms(args.repeats, || Ok(equivocation_loss_oracle(&g, params).map(drop)?))?,
                    median_ms(args.repeats, || Ok(equivocation_loss_sd(&q, params).map(drop)?))?,
                ),
                (
                    "chi2",
                    median_ms(args.repeats, || Ok(chi2_oracle(&g, params).map(drop)?))?,
                    median_ms(args.repeats, || {
                        Ok(chi2_sd(&q, params, HyperplanePath::Transform).map(drop)?)
                    })?,
                ),
            ];
            for (metric, oracle_ms, subspace_ms) in timings {
                out!("{kappa},{n},oracle,{metric},{oracle_ms:.6}");
                out!("{kappa},{n},subspace,{metric},{subspace_ms:.6}");
                cells.push(Cell { kappa, n, metric, oracle_ms, subspace_ms });
            }
        }
    }
    eprintln!("kappa,metric,measured_crossover_n,asymptotic_claim_n");
    for kappa in range(args.kappa_range) {
        let k = kappa as f64;
        for (metric, claim) in [("equivocation", (k * k + 2.0 * k) / 4.0), ("chi2", 2.0 * k)] {
            let measured = crossover(&cells, kappa, metric).map(|n| n.to_string()).unwrap_or_else(|| "none".into());
            eprintln!("{kappa},{metric},{measured},{claim}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse_inclusive() {
        assert_eq!(parse_range("3..5"), Ok((3, 5)));
        assert_eq!(parse_range(" 4 .. 4 "), Ok((4, 4)));
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("5").is_err());
        assert!(parse_range("a..3").is_err());
    }

    fn cell(n: usize, oracle_ms: f64, subspace_ms: f64) -> Cell {
        Cell { kappa: 4, n, metric: "chi2", oracle_ms, subspace_ms }
    }

    #[test]
    fn crossover_needs_subspace_faster_to_the_end() {
        let cells = vec![cell(3, 1.0, 2.0), cell(4, 2.0, 1.0), cell(5, 1.0, 1.5), cell(6, 4.0, 1.0), cell(7, 8.0, 1.0)];
        assert_eq!(crossover(&cells, 4, "chi2"), Some(6));
        assert_eq!(crossover(&cells[..3], 4, "chi2"), None);
        assert_eq!(crossover(&cells, 3, "chi2"), None);
    }
}
