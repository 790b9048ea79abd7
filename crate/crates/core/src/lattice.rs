//! The lattice of subspaces of `F₂^κ`.
//!
//! Subspaces are identified by their reduced row echelon basis (see
//! [`crate::gf2::rref_bits`]); two subspaces are equal exactly when their bases
//! are equal.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{usage, Result};
use crate::gf2::{flip_bits, rank_bits, rref_bits, span_bits, MAX_KAPPA};

/// Largest κ for which the full lattice is materialized.
pub const MAX_LATTICE_KAPPA: usize = 8;

/// Largest κ for which hyperplanes are materialized as [`Subspace`] values.
pub const MAX_HYPERPLANE_KAPPA: usize = 12;

/// A linear subspace of `F₂^κ` with its element list cached.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    kappa: usize,
    basis: Vec<u32>,
    elements: Vec<u32>,
}

impl Subspace {
    /// Span of arbitrary (possibly dependent) vectors.
    pub fn span_of<I: IntoIterator<Item = u32>>(kappa: usize, vectors: I) -> Result<Self> {
        crate::error::check_kappa_cap(kappa, MAX_KAPPA, "subspace")?;
        let vs: Vec<u32> = vectors.into_iter().collect();
        if let Some(v) = vs.iter().find(|&&v| v >> kappa != 0) {
            return usage(format!("vector {v} does not fit in {kappa} bits"));
        }
        Ok(Self::from_reduced(kappa, rref_bits(vs)))
    }

    fn from_reduced(kappa: usize, basis: Vec<u32>) -> Self {
        let elements = span_bits(&basis);
        Self { kappa, basis, elements }
    }

    pub fn zero(kappa: usize) -> Result<Self> {
        Self::span_of(kappa, std::iter::empty())
    }

    /// The whole space `W`.
    pub fn full(kappa: usize) -> Result<Self> {
        Self::span_of(kappa, (0..kappa).map(|r| 1u32 << r))
    }

    /// Span of the first `u` unit vectors, i.e. the elements `0..2^u`.
    pub fn leading(kappa: usize, u: usize) -> Result<Self> {
        if u > kappa {
            return usage(format!("u = {u} exceeds kappa = {kappa}"));
        }
        Self::span_of(kappa, (0..u).map(|r| 1u32 << r))
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical basis; doubles as the identity key.
    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    /// The `2^dim` elements in ascending order.
    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn contains(&self, v: u32) -> bool {
        self.elements.binary_search(&v).is_ok()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|&b| other.contains(b))
    }

    /// Dimension of the intersection with `other`.
    pub fn intersection_dim(&self, other: &Subspace) -> usize {
        let sum = rank_bits(self.basis.iter().chain(other.basis.iter()).copied());
        self.dim() + other.dim() - sum
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.elements.serialize(s)
    }
}

/// Number of `d′`-dimensional subspaces of a `d`-dimensional space over F₂;
/// zero outside `d ≥ d′ ≥ 0`.
pub fn gaussian_binomial(d: i64, d_prime: i64) -> BigUint {
    if d_prime < 0 || d < d_prime {
        return BigUint::zero();
    }
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d_prime {
        num *= (&one << (d - i) as usize) - &one;
        den *= (&one << (d_prime - i) as usize) - &one;
    }
    num / den
}

/// [`gaussian_binomial`] as a float, for use inside real-valued formulas.
pub fn gaussian_binomial_f64(d: i64, d_prime: i64) -> f64 {
    gaussian_binomial(d, d_prime).to_f64().unwrap_or(f64::INFINITY)
}

fn check_lattice_kappa(kappa: usize) -> Result<()> {
    crate::error::check_kappa_cap(kappa, MAX_LATTICE_KAPPA, "full subspace lattice")
}

/// Reduced bases of every `d`-dimensional subspace, generated directly from
/// pivot patterns so that each subspace appears exactly once.
fn reduced_bases(kappa: usize, d: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for pivots in 0u32..(1 << kappa) {
        if pivots.count_ones() as usize != d {
            continue;
        }
        let pivot_list: Vec<usize> = (0..kappa).filter(|p| pivots >> p & 1 == 1).collect();
        // Free positions of the vector with pivot p: non-pivot positions below p.
        let free: Vec<Vec<usize>> = pivot_list
            .iter()
            .map(|&p| (0..p).filter(|&b| pivots >> b & 1 == 0).collect())
            .collect();
        let total: usize = free.iter().map(Vec::len).sum();
        for fill in 0u64..(1u64 << total) {
            let mut cursor = 0;
            let basis = pivot_list
                .iter()
                .zip(&free)
                .map(|(&p, positions)| {
                    let mut v = 1u32 << p;
                    for &b in positions {
                        if fill >> cursor & 1 == 1 {
                            v |= 1 << b;
                        }
                        cursor += 1;
                    }
                    v
                })
                .collect();
            out.push(basis);
        }
    }
    out.sort();
    out
}

/// All `d`-dimensional subspaces of `F₂^κ`, ordered by canonical basis.
pub fn enumerate_subspaces(kappa: usize, d: usize) -> Result<Vec<Subspace>> {
    check_lattice_kappa(kappa)?;
    if d > kappa {
        return usage(format!("dimension {d} exceeds kappa {kappa}"));
    }
    Ok(lattice(kappa)?.layer(d).to_vec())
}

/// The complete subspace lattice of `F₂^κ`, grouped by dimension.
#[derive(Debug)]
pub struct Lattice {
    kappa: usize,
    layers: Vec<Vec<Subspace>>,
    index: HashMap<Vec<u32>, (usize, usize)>,
}

impl Lattice {
    fn build(kappa: usize) -> Self {
        let layers: Vec<Vec<Subspace>> = (0..=kappa)
            .map(|d| {
                reduced_bases(kappa, d)
                    .into_iter()
                    .map(|b| Subspace::from_reduced(kappa, b))
                    .collect()
            })
            .collect();
        let index = layers
            .iter()
            .enumerate()
            .flat_map(|(d, layer)| {
                layer
                    .iter()
                    .enumerate()
                    .map(move |(j, s)| (s.basis.clone(), (d, j)))
            })
            .collect();
        Self { kappa, layers, index }
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Subspaces of dimension `d`.
    pub fn layer(&self, d: usize) -> &[Subspace] {
        &self.layers[d]
    }

    pub fn layers(&self) -> &[Vec<Subspace>] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position `(dimension, index within layer)` of a canonical basis.
    pub fn locate(&self, basis: &[u32]) -> Option<(usize, usize)> {
        self.index.get(basis).copied()
    }
}

/// Shared, lazily built lattice for `1 ≤ κ ≤ 8`.
pub fn lattice(kappa: usize) -> Result<Arc<Lattice>> {
    static CACHE: [OnceLock<Arc<Lattice>>; MAX_LATTICE_KAPPA + 1] =
        [const { OnceLock::new() }; MAX_LATTICE_KAPPA + 1];
    check_lattice_kappa(kappa)?;
    Ok(CACHE[kappa]
        .get_or_init(|| Arc::new(Lattice::build(kappa)))
        .clone())
}

/// Parity vector of the `i`-th hyperplane (1-based): the row-reversed `ν(i)`.
pub fn hyperplane_parity(kappa: usize, i: u32) -> u32 {
    flip_bits(i, kappa)
}

/// The `2^κ − 1` hyperplanes; entry `i − 1` is `{v : flip(ν(i)) · v = 0}`.
pub fn hyperplanes(kappa: usize) -> Result<Vec<Subspace>> {
    crate::error::check_kappa_cap(kappa, MAX_HYPERPLANE_KAPPA, "hyperplane list")?;
    Ok((1u32..(1 << kappa))
        .map(|i| {
            let p = hyperplane_parity(kappa, i);
            let members = (0u32..(1 << kappa)).filter(|v| (v & p).count_ones().is_multiple_of(2));
            Subspace::from_reduced(kappa, rref_bits(members))
        })
        .collect())
}

/// All `d′`-dimensional subspaces of `s`, ordered by canonical basis.
pub fn subspaces_of(s: &Subspace, d_prime: usize) -> Result<Vec<Subspace>> {
    let d = s.dim();
    if d_prime > d {
        return usage(format!("dimension {d_prime} exceeds the subspace dimension {d}"));
    }
    let map = |local: u32| -> u32 {
        (0..d)
            .filter(|j| local >> j & 1 == 1)
            .fold(0, |acc, j| acc ^ s.basis[j])
    };
    let mut out: Vec<Subspace> = if d == 0 {
        vec![Subspace::from_reduced(s.kappa, Vec::new())]
    } else {
        reduced_bases(d, d_prime)
            .into_iter()
            .map(|local| Subspace::from_reduced(s.kappa, rref_bits(local.into_iter().map(map))))
            .collect()
    };
    out.sort();
    Ok(out)
}

/// Number of `d`-dimensional superspaces of a fixed `d′`-dimensional subspace.
pub fn superspace_count(kappa: usize, d_prime: usize, d: usize) -> Result<BigUint> {
    if !(d_prime <= d && d <= kappa) {
        return usage(format!("need d' <= d <= kappa, got ({d_prime}, {d}, {kappa})"));
    }
    Ok(gaussian_binomial((kappa - d_prime) as i64, (d - d_prime) as i64))
}

/// Which nonzero vectors a counted subspace must contain, relative to the
/// excluded subspace `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapCase {
    /// One vector, inside `U`.
    MemberOfU,
    /// One vector, outside `U`.
    OutsideU,
    /// Two distinct vectors, both inside `U`.
    PairInIn,
    /// Two vectors, one inside `U` and one outside.
    PairInOut,
    /// Two vectors outside `U` whose sum lies in `U`.
    PairOutOutSumIn,
    /// Two vectors outside `U` whose sum is also outside `U`.
    PairOutOutSumOut,
}

impl OverlapCase {
    pub const ALL: [OverlapCase; 6] = [
        OverlapCase::MemberOfU,
        OverlapCase::OutsideU,
        OverlapCase::PairInIn,
        OverlapCase::PairInOut,
        OverlapCase::PairOutOutSumIn,
        OverlapCase::PairOutOutSumOut,
    ];

    pub fn parse(tag: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.tag() == tag)
            .map_or_else(|| usage(format!("unknown overlap case {tag:?}")), Ok)
    }

    pub fn tag(self) -> &'static str {
        match self {
            OverlapCase::MemberOfU => "member-of-u",
            OverlapCase::OutsideU => "outside-u",
            OverlapCase::PairInIn => "pair-in-in",
            OverlapCase::PairInOut => "pair-in-out",
            OverlapCase::PairOutOutSumIn => "pair-out-out-sum-in",
            OverlapCase::PairOutOutSumOut => "pair-out-out-sum-out",
        }
    }

    /// True when `F₂^κ` holds vectors in this configuration relative to a
    /// `u`-dimensional `U`.
    pub fn is_realizable(self, kappa: usize, u: usize) -> bool {
        let inside = (1usize << u) - 1;
        let outside = (1usize << kappa) - (1usize << u);
        match self {
            OverlapCase::MemberOfU => inside >= 1,
            OverlapCase::OutsideU => outside >= 1,
            OverlapCase::PairInIn => inside >= 2,
            OverlapCase::PairInOut => inside >= 1 && outside >= 1,
            OverlapCase::PairOutOutSumIn => inside >= 1 && outside >= 1,
            OverlapCase::PairOutOutSumOut => kappa >= u + 2,
        }
    }
}

/// Number of `d`-dimensional subspaces `S` with `dim(S ∩ U) = v` that contain
/// the vectors described by `case`, where `U` is `u`-dimensional.
///
/// Returns zero when the configuration cannot occur.
pub fn overlap_superspace_count(
    kappa: usize,
    u: usize,
    d: usize,
    v: usize,
    case: OverlapCase,
) -> Result<BigUint> {
    if u > kappa || d > kappa {
        return usage(format!("need u, d <= kappa, got u = {u}, d = {d}, kappa = {kappa}"));
    }
    if v > u || v > d || !case.is_realizable(kappa, u) {
        return Ok(BigUint::zero());
    }
    let (k, u, d, v) = (kappa as i64, u as i64, d as i64, v as i64);
    // (inner shift of u, shift of κ − u and d − v in the outer binomial)
    let (top, outer) = match case {
        OverlapCase::MemberOfU => (1, 0),
        OverlapCase::OutsideU => (0, 1),
        OverlapCase::PairInIn => (2, 0),
        OverlapCase::PairInOut | OverlapCase::PairOutOutSumIn => (1, 1),
        OverlapCase::PairOutOutSumOut => (0, 2),
    };
    let first = gaussian_binomial(u - top, u - v);
    let last = gaussian_binomial(k - u - outer, d - v - outer);
    if first.is_zero() || last.is_zero() {
        return Ok(BigUint::zero());
    }
    let shift = (u - v) * (d - v - outer);
    Ok((first * last) << shift as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(3, 1), big(7));
        assert_eq!(gaussian_binomial(4, 2), big(35));
        for d in 0..10 {
            assert_eq!(gaussian_binomial(d, 0), big(1));
        }
        assert_eq!(gaussian_binomial(2, 3), big(0));
        assert_eq!(gaussian_binomial(-1, 0), big(0));
        assert_eq!(gaussian_binomial(3, -1), big(0));
    }

    #[test]
    fn gaussian_binomial_pascal_identity() {
        for a in 1..=12i64 {
            for b in 1..=a {
                let rhs = gaussian_binomial(a - 1, b - 1)
                    + (gaussian_binomial(a - 1, b) << b as usize);
                assert_eq!(gaussian_binomial(a, b), rhs, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn big_values_exceed_u64() {
        assert!(gaussian_binomial(24, 12).bits() > 64);
    }

    #[test]
    fn dimension_one_subspaces_of_three_space() {
        let subs = enumerate_subspaces(3, 1).unwrap();
        assert_eq!(subs.len(), 7);
        let sets: BTreeSet<Vec<u32>> = subs.iter().map(|s| s.elements().to_vec()).collect();
        let expected: BTreeSet<Vec<u32>> = (1..8).map(|i| vec![0, i]).collect();
        assert_eq!(sets, expected);
        assert_eq!(enumerate_subspaces(3, 3).unwrap(), vec![Subspace::full(3).unwrap()]);
        assert!(enumerate_subspaces(3, 4).is_err());
        assert!(enumerate_subspaces(9, 1).is_err());
    }

    /// Every XOR-closed subset containing 0, found by scanning all subsets.
    fn brute_force_subspaces(kappa: usize) -> Vec<BTreeSet<u32>> {
        let size = 1usize << kappa;
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << size) {
            if mask & 1 == 0 {
                continue;
            }
            let members: Vec<u32> = (0..size as u32).filter(|i| mask >> i & 1 == 1).collect();
            let closed = members
                .iter()
                .all(|&a| members.iter().all(|&b| mask >> (a ^ b) & 1 == 1));
            if closed {
                out.push(members.into_iter().collect());
            }
        }
        out
    }

    #[test]
    fn enumeration_matches_closure_scan() {
        for kappa in 1..=4 {
            let brute = brute_force_subspaces(kappa);
            for d in 0..=kappa {
                let ours: BTreeSet<Vec<u32>> = enumerate_subspaces(kappa, d)
                    .unwrap()
                    .iter()
                    .map(|s| s.elements().to_vec())
                    .collect();
                let theirs: BTreeSet<Vec<u32>> = brute
                    .iter()
                    .filter(|s| s.len() == 1 << d)
                    .map(|s| s.iter().copied().collect())
                    .collect();
                assert_eq!(ours, theirs, "kappa={kappa} d={d}");
            }
        }
    }

    #[test]
    fn enumeration_sorted_and_canonical() {
        let subs = enumerate_subspaces(5, 2).unwrap();
        assert!(subs.windows(2).all(|w| w[0].basis() < w[1].basis()));
        for s in &subs {
            assert_eq!(s.elements().len(), 4);
            assert!(s.contains(0));
            assert_eq!(rref_bits(s.elements().iter().copied()), s.basis());
        }
    }

    #[test]
    fn hyperplane_ordering_convention() {
        let h = hyperplanes(2).unwrap();
        assert_eq!(h[0].elements(), &[0, 1]);
        let h3 = hyperplanes(3).unwrap();
        let ours: BTreeSet<_> = h3.iter().cloned().collect();
        let layer: BTreeSet<_> = enumerate_subspaces(3, 2).unwrap().into_iter().collect();
        assert_eq!(ours, layer);
        for (idx, s) in h3.iter().enumerate() {
            let p = flip_bits(idx as u32 + 1, 3);
            for v in 0..8u32 {
                assert_eq!(s.contains(v), (v & p).count_ones().is_multiple_of(2));
            }
        }
    }

    #[test]
    fn each_nonzero_vector_in_half_the_hyperplanes() {
        for kappa in 1..=4usize {
            let hs = hyperplanes(kappa).unwrap();
            for v in 1u32..(1 << kappa) {
                let count = hs.iter().filter(|h| h.contains(v)).count();
                assert_eq!(count, (1 << (kappa - 1)) - 1);
            }
        }
    }

    #[test]
    fn subspaces_of_examples() {
        let w = Subspace::full(3).unwrap();
        assert_eq!(subspaces_of(&w, 2).unwrap(), enumerate_subspaces(3, 2).unwrap());
        let s = Subspace::span_of(4, [0b0011, 0b0101]).unwrap();
        assert_eq!(subspaces_of(&s, 2).unwrap(), vec![s.clone()]);
        assert_eq!(subspaces_of(&s, 0).unwrap(), vec![Subspace::zero(4).unwrap()]);
        let ones = subspaces_of(&s, 1).unwrap();
        assert_eq!(ones.len(), 3);
        assert!(ones.iter().all(|t| t.is_subspace_of(&s)));
    }

    #[test]
    fn superspace_counts_match_scan() {
        assert_eq!(superspace_count(3, 1, 2).unwrap(), big(3));
        let rows_with_one = enumerate_subspaces(3, 2)
            .unwrap()
            .iter()
            .filter(|s| s.contains(1))
            .count();
        assert_eq!(rows_with_one, 3);
        assert_eq!(superspace_count(4, 1, 3).unwrap(), big(7));
        let base = Subspace::span_of(4, [1]).unwrap();
        let scan = enumerate_subspaces(4, 3)
            .unwrap()
            .iter()
            .filter(|s| base.is_subspace_of(s))
            .count();
        assert_eq!(scan, 7);
        for kappa in 1..=5 {
            for d in 0..=kappa {
                assert_eq!(superspace_count(kappa, d, d).unwrap(), big(1));
            }
        }
    }

    #[test]
    fn overlap_count_trivial_cases() {
        assert_eq!(overlap_superspace_count(4, 1, 3, 2, OverlapCase::MemberOfU).unwrap(), big(0));
        assert_eq!(overlap_superspace_count(4, 3, 1, 2, OverlapCase::OutsideU).unwrap(), big(0));
        assert_eq!(OverlapCase::parse("pair-in-out").unwrap(), OverlapCase::PairInOut);
        assert!(OverlapCase::parse("bogus").is_err());
    }

    #[test]
    fn intersection_dimension() {
        let a = Subspace::span_of(4, [1, 2]).unwrap();
        let b = Subspace::span_of(4, [2, 4]).unwrap();
        assert_eq!(a.intersection_dim(&b), 1);
        assert_eq!(a.intersection_dim(&a), 2);
    }
}
