//! Code definition vectors and the named constructions.
//!
//! A code is summarized, up to column order, by `q`: entry `q_i` is the
//! fraction of generator columns equal to `ν(i)`.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::gf2::{GeneratorMatrix, MAX_KAPPA};
use crate::lattice::{hyperplane_parity, Subspace};

/// Tolerance on the unit-sum constraint.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Tolerance on the integrality of `n · q_i`.
pub const REALIZABILITY_TOLERANCE: f64 = 1e-9;

/// A length-`2^κ` vector of column fractions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeDefinition {
    kappa: usize,
    q: Vec<f64>,
    /// Blocklength at which the construction is naturally realized, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    natural_n: Option<usize>,
}

/// Outcome of checking `n · q_i ∈ ℕ` for every `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizabilityReport {
    pub n: usize,
    pub realizable: bool,
    pub offending: Vec<usize>,
}

/// Validates length and returns κ for a raw q slice.
pub fn kappa_of(q: &[f64]) -> Result<usize> {
    let len = q.len();
    if len < 2 || !len.is_power_of_two() {
        return usage(format!("q has length {len}, expected 2^kappa with kappa >= 1"));
    }
    let kappa = len.trailing_zeros() as usize;
    crate::error::check_kappa_cap(kappa, MAX_KAPPA, "q vector")?;
    Ok(kappa)
}

impl CodeDefinition {
    /// Checks nonnegativity and unit sum.
    pub fn new(q: Vec<f64>) -> Result<Self> {
        let kappa = kappa_of(&q)?;
        if let Some(i) = q.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return usage(format!("q[{i}] = {} is negative or not finite", q[i]));
        }
        let total: f64 = crate::sum::kahan_sum(q.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return usage(format!("q sums to {total}, expected 1"));
        }
        Ok(Self { kappa, q, natural_n: None })
    }

    fn with_natural_n(mut self, n: usize) -> Self {
        self.natural_n = Some(n);
        self
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.q
    }

    pub fn natural_n(&self) -> Option<usize> {
        self.natural_n
    }

    /// True when the all-zero column is absent (`q₀ = 0`).
    pub fn is_reduced(&self) -> bool {
        self.q[0] == 0.0
    }

    pub fn realizability(&self, n: usize) -> RealizabilityReport {
        realizability(&self.q, n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&QFile { kappa: self.kappa, q: self.q.clone() })
            .expect("serializing plain numbers cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: QFile = serde_json::from_str(text)
            .map_err(|e| Error::Usage(format!("malformed q file: {e}")))?;
        let def = Self::new(file.q)?;
        if def.kappa != file.kappa {
            return usage(format!(
                "q file declares kappa {} but holds {} entries",
                file.kappa,
                def.q.len()
            ));
        }
        Ok(def)
    }
}

#[derive(Serialize, Deserialize)]
struct QFile {
    kappa: usize,
    q: Vec<f64>,
}

/// Checks `n · q_i ∈ ℕ` within [`REALIZABILITY_TOLERANCE`].
pub fn realizability(q: &[f64], n: usize) -> RealizabilityReport {
    let offending: Vec<usize> = q
        .iter()
        .enumerate()
        .filter(|(_, &x)| {
            let scaled = x * n as f64;
            scaled < -REALIZABILITY_TOLERANCE
                || (scaled - scaled.round()).abs() > REALIZABILITY_TOLERANCE
        })
        .map(|(i, _)| i)
        .collect();
    RealizabilityReport { n, realizable: n > 0 && offending.is_empty(), offending }
}

/// Column histogram of `g`, normalized by `n`.
pub fn from_generator(g: &GeneratorMatrix) -> Result<CodeDefinition> {
    let n = g.n();
    if n == 0 {
        return usage("generator matrix has no columns");
    }
    let mut counts = vec![0usize; 1 << g.kappa()];
    for &c in g.col_bits() {
        counts[c as usize] += 1;
    }
    let q = counts.into_iter().map(|c| c as f64 / n as f64).collect();
    CodeDefinition::new(q)
}

/// Generator with `n · q_i` copies of column `ν(i)`, columns ascending.
pub fn to_generator(q: &CodeDefinition, n: usize) -> Result<GeneratorMatrix> {
    let report = q.realizability(n);
    if !report.realizable {
        return Err(Error::Realizability(report));
    }
    let cols = q
        .q
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| std::iter::repeat_n(i as u32, (x * n as f64).round() as usize))
        .collect();
    GeneratorMatrix::new(q.kappa, cols)
}

fn check_kappa(kappa: usize) -> Result<()> {
    crate::error::check_kappa_cap(kappa, MAX_KAPPA, "code construction")
}

/// Equal weight on every nonzero column; realized by the simplex code at
/// `n = 2^κ − 1`.
pub fn uniform_fraction(kappa: usize) -> Result<CodeDefinition> {
    subspace_exclusion(kappa, 0)
}

/// Equal weight on every column outside the span of the first `u` unit
/// vectors; realized at `n = 2^κ − 2^u`.
pub fn subspace_exclusion(kappa: usize, u: usize) -> Result<CodeDefinition> {
    check_kappa(kappa)?;
    if u >= kappa {
        return usage(format!("u = {u} must be below kappa = {kappa}"));
    }
    let size = 1usize << kappa;
    let excluded = 1usize << u;
    let weight = 1.0 / (size - excluded) as f64;
    let q = (0..size).map(|i| if i < excluded { 0.0 } else { weight }).collect();
    Ok(CodeDefinition { kappa, q, natural_n: None }.with_natural_n(size - excluded))
}

/// Equal weight on every column outside an arbitrary proper subspace `U`.
pub fn subspace_exclusion_of(excluded: &Subspace) -> Result<CodeDefinition> {
    let kappa = excluded.kappa();
    if excluded.dim() >= kappa {
        return usage("the excluded subspace must be proper");
    }
    let size = 1usize << kappa;
    let outside = size - excluded.elements().len();
    let weight = 1.0 / outside as f64;
    let q = (0..size as u32)
        .map(|i| if excluded.contains(i) { 0.0 } else { weight })
        .collect();
    Ok(CodeDefinition { kappa, q, natural_n: Some(outside) })
}

/// Exclusion code of the `i`-th hyperplane (1-based, see
/// [`crate::lattice::hyperplanes`]): zero on the hyperplane, `2^{1−κ}` off it.
pub fn hyperplane_exclusion(kappa: usize, i: u32) -> Result<CodeDefinition> {
    check_kappa(kappa)?;
    if i == 0 || i >= 1 << kappa {
        return usage(format!("hyperplane index {i} outside 1..2^kappa"));
    }
    let p = hyperplane_parity(kappa, i);
    let weight = 1.0 / (1u64 << (kappa - 1)) as f64;
    let q = (0u32..(1 << kappa))
        .map(|v| if (v & p).count_ones().is_multiple_of(2) { 0.0 } else { weight })
        .collect();
    Ok(CodeDefinition { kappa, q, natural_n: Some(1 << (kappa - 1)) })
}

/// The displacement `q̄ − q̌^{u}` and its closed-form Euclidean length.
pub fn rho(kappa: usize, u: usize) -> Result<(Vec<f64>, f64)> {
    let bar = uniform_fraction(kappa)?;
    let check = subspace_exclusion(kappa, u)?;
    let diff = bar.q.iter().zip(&check.q).map(|(a, b)| a - b).collect();
    Ok((diff, rho_magnitude(kappa, u)))
}

/// `sqrt((2^u − 1) / ((2^κ − 2^u)(2^κ − 1)))`.
pub fn rho_magnitude(kappa: usize, u: usize) -> f64 {
    let two_k = (1u64 << kappa) as f64;
    let two_u = (1u64 << u) as f64;
    ((two_u - 1.0) / ((two_k - two_u) * (two_k - 1.0))).sqrt()
}
