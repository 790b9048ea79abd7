//! Reference metrics by enumerating every erasure pattern.
//!
//! Pattern probabilities depend only on the number of revealed positions, so
//! the enumeration tallies integer quantities per weight and combines them
//! with the channel probabilities at the end. The tallies are exact, which
//! makes the result independent of how the mask range is split across
//! workers.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{usage, Error, Result};
use crate::gf2::GeneratorMatrix;
use crate::sum::Kahan;

/// Largest blocklength accepted by the enumeration.
pub const MAX_ORACLE_N: usize = 24;

/// Largest blocklength for total variation.
pub const MAX_TV_N: usize = 16;

/// Largest κ for total variation.
pub const MAX_TV_KAPPA: usize = 8;

/// How the eavesdropper's channel is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelParams {
    /// Each position erased independently with probability `epsilon`.
    FixedEpsilon { n: usize, epsilon: f64 },
    /// Exactly `mu` positions revealed, chosen uniformly.
    FixedMu { n: usize, mu: usize },
}

impl ChannelParams {
    pub fn epsilon(n: usize, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return usage(format!("epsilon {epsilon} outside [0, 1]"));
        }
        Ok(Self::FixedEpsilon { n, epsilon })
    }

    pub fn mu(n: usize, mu: usize) -> Result<Self> {
        if mu > n {
            return usage(format!("mu {mu} exceeds n {n}"));
        }
        Ok(Self::FixedMu { n, mu })
    }

    pub fn n(&self) -> usize {
        match *self {
            Self::FixedEpsilon { n, .. } | Self::FixedMu { n, .. } => n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    EquivocationLoss,
    Chi2,
    TotalVariation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Oracle,
    Subspace,
    Montecarlo,
}

/// A metric value with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricResult {
    pub metric: Metric,
    pub method: Method,
    /// Bits for equivocation loss, dimensionless otherwise.
    pub value: f64,
    pub params: ChannelParams,
    pub runtime: Duration,
    /// Caveats, e.g. a value fixed by convention rather than computed.
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct MetricResultJson<'a> {
    metric: Metric,
    method: Method,
    value: f64,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<usize>,
    runtime_ms: f64,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    notes: &'a [String],
}

impl Serialize for MetricResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (epsilon, mu) = match self.params {
            ChannelParams::FixedEpsilon { epsilon, .. } => (Some(epsilon), None),
            ChannelParams::FixedMu { mu, .. } => (None, Some(mu)),
        };
        MetricResultJson {
            metric: self.metric,
            method: self.method,
            value: self.value,
            n: self.params.n(),
            epsilon,
            mu,
            runtime_ms: self.runtime.as_secs_f64() * 1e3,
            notes: &self.notes,
        }
        .serialize(s)
    }
}

/// One erasure pattern of the enumeration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternRow {
    /// Character `j` is `1` when position `j + 1` is revealed.
    pub pattern: String,
    pub rank: usize,
    pub probability: f64,
}

/// Probability of one pattern with `revealed` of `n` positions revealed.
pub fn pattern_probability(n: usize, revealed: usize, epsilon: f64) -> f64 {
    epsilon.powi((n - revealed) as i32) * (1.0 - epsilon).powi(revealed as i32)
}

fn mask_to_pattern(mask: u64, n: usize) -> String {
    (0..n).map(|j| if mask >> j & 1 == 1 { '1' } else { '0' }).collect()
}

fn check_n(g: &GeneratorMatrix, params: &ChannelParams, cap: usize) -> Result<()> {
    if g.n() != params.n() {
        return usage(format!(
            "generator has {} columns but parameters specify n = {}",
            g.n(),
            params.n()
        ));
    }
    if g.n() > cap {
        return Err(Error::Resource(format!(
            "enumeration over 2^{} patterns exceeds the n <= {cap} cap",
            g.n()
        )));
    }
    Ok(())
}

/// Every erasure pattern with its rank and probability, ordered by number of
/// revealed positions and then with earlier positions revealed first.
pub fn pattern_table(g: &GeneratorMatrix, epsilon: f64) -> Result<Vec<PatternRow>> {
    let params = ChannelParams::epsilon(g.n(), epsilon)?;
    check_n(g, &params, MAX_ORACLE_N)?;
    let n = g.n();
    let mut masks: Vec<u64> = (0..1u64 << n).collect();
    let reversed = |m: u64| m.reverse_bits() >> (64 - n.max(1));
    masks.sort_by_key(|&m| (m.count_ones(), std::cmp::Reverse(reversed(m))));
    Ok(masks
        .into_par_iter()
        .map(|m| PatternRow {
            pattern: mask_to_pattern(m, n),
            rank: g.rank_of_mask(m),
            probability: pattern_probability(n, m.count_ones() as usize, epsilon),
        })
        .collect())
}

/// `H(M | Z = z) = k − |r| + rank(G_r)` for the revealed positions `revealed`
/// (1-based), where `k = n − κ`.
pub fn conditional_entropy(g: &GeneratorMatrix, revealed: &[usize]) -> Result<f64> {
    let mut mask = 0u64;
    for &p in revealed {
        if p == 0 || p > g.n() {
            return usage(format!("position {p} outside 1..={}", g.n()));
        }
        mask |= 1 << (p - 1);
    }
    let k = g.n() as f64 - g.kappa() as f64;
    Ok(k - mask.count_ones() as f64 + g.rank_of_mask(mask) as f64)
}

/// Exact per-weight sums over all patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
struct WeightTally {
    /// Number of patterns.
    count: Vec<u64>,
    /// Σ (|r| − rank).
    loss: Vec<u64>,
    /// Σ 2^(|r| − rank).
    exp_loss: Vec<u128>,
    /// Σ 2^(n − (|r| − rank)).
    exp_neg_loss: Vec<u128>,
}

impl WeightTally {
    fn zero(n: usize) -> Self {
        Self {
            count: vec![0; n + 1],
            loss: vec![0; n + 1],
            exp_loss: vec![0; n + 1],
            exp_neg_loss: vec![0; n + 1],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for w in 0..self.count.len() {
            self.count[w] += other.count[w];
            self.loss[w] += other.loss[w];
            self.exp_loss[w] += other.exp_loss[w];
            self.exp_neg_loss[w] += other.exp_neg_loss[w];
        }
        self
    }
}

const CHUNK: u64 = 1 << 12;

fn tally(g: &GeneratorMatrix) -> WeightTally {
    let n = g.n();
    let total = 1u64 << n;
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = WeightTally::zero(n);
            for m in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let w = m.count_ones() as usize;
                let loss = w - g.rank_of_mask(m);
                t.count[w] += 1;
                t.loss[w] += loss as u64;
                t.exp_loss[w] += 1u128 << loss;
                t.exp_neg_loss[w] += 1u128 << (n - loss);
            }
            t
        })
        .reduce(|| WeightTally::zero(n), WeightTally::merge)
}

/// Combines exact per-weight sums over patterns with the channel law:
/// fixed-ε weighs every pattern by its probability, fixed-μ averages the
/// patterns of weight μ.
fn combine(params: &ChannelParams, t: &WeightTally, sum_over_weight: impl Fn(usize) -> f64) -> f64 {
    match *params {
        ChannelParams::FixedEpsilon { n, epsilon } => {
            let mut acc = Kahan::new();
            for w in 0..=n {
                let p = pattern_probability(n, w, epsilon);
                if p != 0.0 {
                    acc.add(p * sum_over_weight(w));
                }
            }
            acc.value()
        }
        ChannelParams::FixedMu { mu, .. } => sum_over_weight(mu) / t.count[mu] as f64,
    }
}

fn finish(metric: Metric, value: f64, params: ChannelParams, start: Instant) -> MetricResult {
    MetricResult {
        metric,
        method: Method::Oracle,
        value,
        params,
        runtime: start.elapsed(),
        notes: Vec::new(),
    }
}

/// Expected number of message bits leaked, `Σ_r Pr(r)(|r| − rank(G_r))`.
pub fn equivocation_loss_oracle(g: &GeneratorMatrix, params: ChannelParams) -> Result<MetricResult> {
    check_n(g, &params, MAX_ORACLE_N)?;
    let start = Instant::now();
    let t = tally(g);
    let value = combine(&params, &t, |w| t.loss[w] as f64);
    Ok(finish(Metric::EquivocationLoss, value, params, start))
}

/// χ² divergence, `Σ_r Pr(r) 2^(|r| − rank(G_r)) − 1`.
pub fn chi2_oracle(g: &GeneratorMatrix, params: ChannelParams) -> Result<MetricResult> {
    check_n(g, &params, MAX_ORACLE_N)?;
    let start = Instant::now();
    let t = tally(g);
    let value = combine(&params, &t, |w| t.exp_loss[w] as f64) - 1.0;
    Ok(finish(Metric::Chi2, value, params, start))
}

/// Total variation distance between `p_MZ` and `p_M p_Z`.
///
/// For an observation revealing pattern `r`, `2^H` of the `2^k` messages are
/// consistent with it (`H = H(M | Z = z)`), each with joint probability
/// `p_Z(z) 2^{−H}`; the others have joint probability zero, while the product
/// distribution assigns `p_Z(z) 2^{−k}` to every message. Summing both classes
/// gives `Σ_r Pr(r)(1 − 2^{−(|r| − rank G_r)})`.
pub fn total_variation_oracle(
    g: &GeneratorMatrix,
    params: ChannelParams,
) -> Result<MetricResult> {
    check_n(g, &params, MAX_TV_N)?;
    if g.kappa() > MAX_TV_KAPPA {
        return Err(Error::Resource(format!(
            "total variation supports kappa <= {MAX_TV_KAPPA}, got {}",
            g.kappa()
        )));
    }
    let start = Instant::now();
    let scale = (1u128 << g.n()) as f64;
    let t = tally(g);
    let value = combine(&params, &t, |w| {
        t.count[w] as f64 - t.exp_neg_loss[w] as f64 / scale
    });
    Ok(finish(Metric::TotalVariation, value, params, start))
}

/// Expected rank of the revealed submatrix, `Σ_r Pr(r) rank(G_r)`.
pub fn expected_rank_oracle(g: &GeneratorMatrix, epsilon: f64) -> Result<f64> {
    let params = ChannelParams::epsilon(g.n(), epsilon)?;
    check_n(g, &params, MAX_ORACLE_N)?;
    let t = tally(g);
    Ok(combine(&params, &t, |w| {
        (w as u64 * t.count[w] - t.loss[w]) as f64
    }))
}
