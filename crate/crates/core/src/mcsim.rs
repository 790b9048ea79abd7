//! Monte Carlo simulation of the erasure wiretap channel.
//!
//! Trials are grouped into fixed blocks; block `b` draws from a ChaCha stream
//! selected by `b` under the master seed. Per-trial values are integers and are
//! summed exactly, so estimates do not depend on the number of workers.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::gf2::GeneratorMatrix;
use crate::oracle::{Method, Metric};

/// Largest blocklength of the simulator (codewords are 64-bit masks).
pub const MAX_SIM_N: usize = 64;

/// Trials per random stream.
const BLOCK: u64 = 4096;

/// Coset encoder `x = [m m′] [G′; G]`: the message `m` picks a coset of the
/// code generated by `G`, the uniform `m′` picks a word inside it.
#[derive(Clone, Debug)]
pub struct CosetEncoder {
    n: usize,
    kappa: usize,
    /// Rows of `G` as n-bit masks (bit `j` is position `j + 1`).
    g_rows: Vec<u64>,
    /// Rows of `G′`.
    gprime_rows: Vec<u64>,
}

fn insert64(basis: &mut [u64; 64], mut v: u64) -> bool {
    while v != 0 {
        let top = 63 - v.leading_zeros() as usize;
        if basis[top] == 0 {
            basis[top] = v;
            return true;
        }
        v ^= basis[top];
    }
    false
}

impl CosetEncoder {
    /// Completes the rows of `G` with unit vectors, taken in position order,
    /// until the combined matrix is square and invertible.
    pub fn new(g: &GeneratorMatrix) -> Result<Self> {
        let n = g.n();
        if n == 0 || n > MAX_SIM_N {
            return Err(Error::Resource(format!("encoder supports 1 <= n <= {MAX_SIM_N}")));
        }
        let g_rows = rows_of(g);
        let mut basis = [0u64; 64];
        for &r in &g_rows {
            if !insert64(&mut basis, r) {
                return usage("generator matrix must have full row rank");
            }
        }
        let gprime_rows = (0..n)
            .map(|j| 1u64 << j)
            .filter(|&e| insert64(&mut basis, e))
            .collect();
        Self::with_auxiliary(g, gprime_rows)
    }

    /// Uses the given `G′` rows; the combined matrix must be invertible.
    pub fn with_auxiliary(g: &GeneratorMatrix, gprime_rows: Vec<u64>) -> Result<Self> {
        let n = g.n();
        if n == 0 || n > MAX_SIM_N {
            return Err(Error::Resource(format!("encoder supports 1 <= n <= {MAX_SIM_N}")));
        }
        let g_rows = rows_of(g);
        if g_rows.len() + gprime_rows.len() != n {
            return usage("G and G' together must have n rows");
        }
        let mut basis = [0u64; 64];
        for &r in g_rows.iter().chain(&gprime_rows) {
            if r >> n != 0 && n < 64 {
                return usage("auxiliary row wider than n");
            }
            if !insert64(&mut basis, r) {
                return usage("rows of G and G' are linearly dependent");
            }
        }
        Ok(Self { n, kappa: g.kappa(), g_rows, gprime_rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length `k = n − κ`.
    pub fn k(&self) -> usize {
        self.n - self.kappa
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn gprime_rows(&self) -> &[u64] {
        &self.gprime_rows
    }

    /// Codeword for message `m` (k bits) and randomizer `m_prime` (κ bits).
    pub fn encode(&self, m: u64, m_prime: u64) -> Result<u64> {
        if self.k() < 64 && m >> self.k() != 0 {
            return usage(format!("message wider than k = {}", self.k()));
        }
        if m_prime >> self.kappa != 0 {
            return usage(format!("randomizer wider than kappa = {}", self.kappa));
        }
        let pick = |rows: &[u64], bits: u64| {
            rows.iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .fold(0u64, |acc, (_, r)| acc ^ r)
        };
        Ok(pick(&self.gprime_rows, m) ^ pick(&self.g_rows, m_prime))
    }
}

fn rows_of(g: &GeneratorMatrix) -> Vec<u64> {
    (0..g.kappa())
        .map(|r| {
            g.col_bits()
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, &c)| acc | (((c >> r) & 1) as u64) << j)
        })
        .collect()
}

/// What the eavesdropper receives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    /// `None` marks an erasure.
    pub symbols: Vec<Option<bool>>,
    /// Bit `j` set when position `j + 1` was received.
    pub revealed: u64,
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            f.write_str(match s {
                Some(true) => "1",
                Some(false) => "0",
                None => "?",
            })?;
        }
        Ok(())
    }
}

fn revealed_mask<R: Rng>(n: usize, epsilon: f64, rng: &mut R) -> u64 {
    (0..n).fold(0u64, |acc, j| {
        if rng.random_bool(epsilon) {
            acc
        } else {
            acc | 1 << j
        }
    })
}

/// Erases each of the `n` symbols of `x` independently with probability `ε`.
pub fn erase<R: Rng>(x: u64, n: usize, epsilon: f64, rng: &mut R) -> Result<Observation> {
    if !(0.0..=1.0).contains(&epsilon) {
        return usage(format!("epsilon {epsilon} outside [0, 1]"));
    }
    if n > MAX_SIM_N {
        return Err(Error::Resource(format!("n exceeds {MAX_SIM_N}")));
    }
    let revealed = revealed_mask(n, epsilon, rng);
    let symbols = (0..n)
        .map(|j| (revealed >> j & 1 == 1).then_some(x >> j & 1 == 1))
        .collect();
    Ok(Observation { symbols, revealed })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub metric: Metric,
    pub method: Method,
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub epsilon: f64,
}

/// Exact sums of per-trial values.
#[derive(Clone, Copy, Default)]
struct Moments {
    sum: u128,
    sum_sq: u128,
}

fn simulate(
    g: &GeneratorMatrix,
    epsilon: f64,
    trials: u64,
    seed: u64,
    per_trial: impl Fn(usize) -> u128 + Sync,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return usage("at least one trial is required");
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return usage(format!("epsilon {epsilon} outside [0, 1]"));
    }
    let n = g.n();
    if n > MAX_SIM_N {
        return Err(Error::Resource(format!("n exceeds {MAX_SIM_N}")));
    }
    let blocks = trials.div_ceil(BLOCK);
    let m = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK.min(trials - b * BLOCK);
            let mut acc = Moments::default();
            for _ in 0..count {
                let mask = revealed_mask(n, epsilon, &mut rng);
                let loss = mask.count_ones() as usize - g.rank_of_mask(mask);
                let x = per_trial(loss);
                acc.sum += x;
                acc.sum_sq += x * x;
            }
            acc
        })
        .reduce(Moments::default, |a, b| Moments {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
        });
    let nt = trials as f64;
    let mean = m.sum as f64 / nt;
    let se = if trials < 2 {
        0.0
    } else {
        // N Σx² − (Σx)² is exact in integers; the variance is that over N(N−1).
        let spread = (trials as u128)
            .checked_mul(m.sum_sq)
            .and_then(|a| m.sum.checked_mul(m.sum).map(|b| a - b));
        let var = match spread {
            Some(s) => s as f64 / (nt * (nt - 1.0)),
            None => (m.sum_sq as f64 - m.sum as f64 * mean) / (nt - 1.0),
        };
        (var.max(0.0) / nt).sqrt()
    };
    Ok((mean, se))
}

/// Sample mean of `|r| − rank(G_r)` over simulated erasure patterns. The
/// message content does not affect this quantity, so only patterns are drawn.
pub fn estimate_equivocation(
    g: &GeneratorMatrix,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let (value, std_error) = simulate(g, epsilon, trials, seed, |loss| loss as u128)?;
    Ok(Estimate {
        metric: Metric::EquivocationLoss,
        method: Method::Montecarlo,
        value,
        std_error,
        trials,
        seed,
        epsilon,
    })
}

/// Sample mean of `2^{|r| − rank(G_r)} − 1`.
pub fn estimate_chi2(g: &GeneratorMatrix, epsilon: f64, trials: u64, seed: u64) -> Result<Estimate> {
    let (value, std_error) = simulate(g, epsilon, trials, seed, |loss| (1u128 << loss) - 1)?;
    Ok(Estimate {
        metric: Metric::Chi2,
        method: Method::Montecarlo,
        value,
        std_error,
        trials,
        seed,
        epsilon,
    })
}
