//! Linear algebra over F₂ on bitmask columns.
//!
//! A column of height κ is stored as an integer whose bit `r − 1` holds row
//! `r`, so row 1 is the least significant bit. The integer value of a column is
//! therefore the index `i` of the binary expansion `ν(i)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};

/// Largest supported vector width.
pub const MAX_KAPPA: usize = 20;

/// A κ-bit binary vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinVec {
    bits: u32,
    width: u8,
}

impl BinVec {
    pub fn new(bits: u32, width: usize) -> Result<Self> {
        crate::error::check_kappa_cap(width, MAX_KAPPA, "bit vector")?;
        if bits >> width != 0 {
            return usage(format!("value {bits} does not fit in {width} bits"));
        }
        Ok(Self { bits, width: width as u8 })
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::new(0, width)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    /// Entry in row `row` (1-based).
    pub fn row(self, row: usize) -> bool {
        (self.bits >> (row - 1)) & 1 == 1
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    /// Inner product over F₂.
    pub fn dot(self, other: BinVec) -> bool {
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    /// Row order reversed, so row 1 becomes row κ.
    pub fn flip(self) -> BinVec {
        BinVec { bits: flip_bits(self.bits, self.width()), width: self.width }
    }
}

impl std::ops::BitXor for BinVec {
    type Output = BinVec;

    fn bitxor(self, rhs: BinVec) -> BinVec {
        debug_assert_eq!(self.width, rhs.width);
        BinVec { bits: self.bits ^ rhs.bits, width: self.width }
    }
}

/// Reverses the low `width` bits of `bits`.
pub fn flip_bits(bits: u32, width: usize) -> u32 {
    if width == 0 {
        return 0;
    }
    bits.reverse_bits() >> (32 - width)
}

fn common_width(vectors: &[BinVec]) -> Result<Option<usize>> {
    let Some(first) = vectors.first() else {
        return Ok(None);
    };
    if let Some(bad) = vectors.iter().find(|v| v.width != first.width) {
        return usage(format!(
            "mixed vector widths {} and {}",
            first.width(),
            bad.width()
        ));
    }
    Ok(Some(first.width()))
}

/// Incremental echelon basis keyed by leading (highest) bit.
#[derive(Clone, Debug, Default)]
pub struct XorBasis {
    slots: [u32; 32],
    rank: usize,
}

impl XorBasis {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` to the spanning set; returns true when the rank grows.
    pub fn insert(&mut self, mut v: u32) -> bool {
        while v != 0 {
            let top = 31 - v.leading_zeros() as usize;
            if self.slots[top] == 0 {
                self.slots[top] = v;
                self.rank += 1;
                return true;
            }
            v ^= self.slots[top];
        }
        false
    }

    /// True when `v` lies in the current span.
    pub fn contains(&self, mut v: u32) -> bool {
        while v != 0 {
            let top = 31 - v.leading_zeros() as usize;
            if self.slots[top] == 0 {
                return false;
            }
            v ^= self.slots[top];
        }
        true
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Reduced row echelon basis, pivots (highest bits) strictly increasing.
    pub fn reduced(&self) -> Vec<u32> {
        let mut slots = self.slots;
        for p in 0..32 {
            if slots[p] == 0 {
                continue;
            }
            for q in 0..p {
                if slots[q] != 0 && (slots[p] >> q) & 1 == 1 {
                    slots[p] ^= slots[q];
                }
            }
        }
        slots.into_iter().filter(|&v| v != 0).collect()
    }
}

/// Rank of raw bitmask columns.
pub fn rank_bits<I: IntoIterator<Item = u32>>(vectors: I) -> usize {
    let mut basis = XorBasis::new();
    for v in vectors {
        basis.insert(v);
    }
    basis.rank()
}

/// Canonical reduced basis of the span of raw bitmask columns.
pub fn rref_bits<I: IntoIterator<Item = u32>>(vectors: I) -> Vec<u32> {
    let mut basis = XorBasis::new();
    for v in vectors {
        basis.insert(v);
    }
    basis.reduced()
}

/// All `2^d` combinations of an independent basis, sorted ascending.
pub fn span_bits(basis: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(1 << basis.len());
    out.push(0u32);
    for &b in basis {
        let len = out.len();
        for j in 0..len {
            out.push(out[j] ^ b);
        }
    }
    out.sort_unstable();
    out
}

/// Dimension of the span of `vectors`.
pub fn rank(vectors: &[BinVec]) -> Result<usize> {
    common_width(vectors)?;
    Ok(rank_bits(vectors.iter().map(|v| v.bits)))
}

/// Unique reduced row echelon basis of the span of `vectors`.
pub fn rref(vectors: &[BinVec]) -> Result<Vec<BinVec>> {
    let Some(width) = common_width(vectors)? else {
        return Ok(Vec::new());
    };
    Ok(rref_bits(vectors.iter().map(|v| v.bits))
        .into_iter()
        .map(|bits| BinVec { bits, width: width as u8 })
        .collect())
}

/// Every element of the span of an independent basis, sorted ascending.
///
/// `width` is only consulted for the empty basis, whose span is `{0}`.
pub fn span_elements(basis: &[BinVec], width: usize) -> Result<Vec<BinVec>> {
    let w = common_width(basis)?.unwrap_or(width);
    if w != width {
        return usage(format!("basis width {w} differs from requested width {width}"));
    }
    BinVec::zero(width)?;
    if rank_bits(basis.iter().map(|v| v.bits)) != basis.len() {
        return usage("basis vectors are linearly dependent");
    }
    let raw: Vec<u32> = basis.iter().map(|v| v.bits).collect();
    Ok(span_bits(&raw)
        .into_iter()
        .map(|bits| BinVec { bits, width: width as u8 })
        .collect())
}

/// A κ × n matrix over F₂ stored column by column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    kappa: usize,
    cols: Vec<u32>,
}

impl GeneratorMatrix {
    pub fn new(kappa: usize, cols: Vec<u32>) -> Result<Self> {
        crate::error::check_kappa_cap(kappa, MAX_KAPPA, "generator matrix")?;
        if let Some(c) = cols.iter().find(|&&c| c >> kappa != 0) {
            return usage(format!("column value {c} does not fit in {kappa} rows"));
        }
        Ok(Self { kappa, cols })
    }

    pub fn from_columns(cols: &[BinVec]) -> Result<Self> {
        let Some(kappa) = common_width(cols)? else {
            return usage("a generator matrix needs at least one column");
        };
        Self::new(kappa, cols.iter().map(|c| c.bits).collect())
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn n(&self) -> usize {
        self.cols.len()
    }

    /// Column values; column `j` (0-based) is position `j + 1`.
    pub fn col_bits(&self) -> &[u32] {
        &self.cols
    }

    pub fn columns(&self) -> Vec<BinVec> {
        self.cols
            .iter()
            .map(|&bits| BinVec { bits, width: self.kappa as u8 })
            .collect()
    }

    pub fn rank(&self) -> usize {
        rank_bits(self.cols.iter().copied())
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.kappa
    }

    /// Rank of the submatrix formed by the positions set in `mask`
    /// (bit `j` selects position `j + 1`).
    pub fn rank_of_mask(&self, mask: u64) -> usize {
        let mut basis = XorBasis::new();
        let mut m = mask;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            if basis.insert(self.cols[j]) && basis.rank() == self.kappa {
                break;
            }
        }
        basis.rank()
    }

    /// Text form: κ lines of n characters, line 1 holding row 1.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.n() + 1) * self.kappa);
        for r in 0..self.kappa {
            for &c in &self.cols {
                out.push(if (c >> r) & 1 == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for GeneratorMatrix {
    type Err = Error;

    /// Parses the text form. Whitespace inside a line is ignored, as are blank
    /// lines and lines starting with `#`.
    fn from_str(s: &str) -> Result<Self> {
        let mut rows: Vec<Vec<bool>> = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            for ch in trimmed.chars().filter(|c| !c.is_whitespace()) {
                match ch {
                    '0' => row.push(false),
                    '1' => row.push(true),
                    other => {
                        return usage(format!(
                            "line {}: unexpected character {other:?}",
                            lineno + 1
                        ))
                    }
                }
            }
            rows.push(row);
        }
        let kappa = rows.len();
        if kappa == 0 {
            return usage("generator matrix text has no rows");
        }
        let n = rows[0].len();
        if let Some((r, _)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
            return usage(format!("row {} has a different length than row 1", r + 1));
        }
        let cols = (0..n)
            .map(|j| {
                rows.iter()
                    .enumerate()
                    .fold(0u32, |acc, (r, row)| acc | ((row[j] as u32) << r))
            })
            .collect();
        Self::new(kappa, cols)
    }
}

impl fmt::Display for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(bits: u32) -> BinVec {
        BinVec::new(bits, 3).unwrap()
    }

    fn example() -> GeneratorMatrix {
        GeneratorMatrix::new(3, vec![0, 1, 2, 2, 7]).unwrap()
    }

    fn positions(g: &GeneratorMatrix, pattern: &str) -> Vec<BinVec> {
        let cols = g.columns();
        pattern
            .chars()
            .enumerate()
            .filter(|(_, c)| *c == '1')
            .map(|(j, _)| cols[j])
            .collect()
    }

    #[test]
    fn rank_of_table_rows() {
        let g = example();
        assert_eq!(rank(&positions(&g, "01011")).unwrap(), 3);
        assert_eq!(rank(&positions(&g, "10110")).unwrap(), 1);
        assert_eq!(rank(&[]).unwrap(), 0);
    }

    #[test]
    fn mixed_widths_rejected() {
        let a = BinVec::new(1, 3).unwrap();
        let b = BinVec::new(1, 4).unwrap();
        assert!(matches!(rank(&[a, b]), Err(Error::Usage(_))));
    }

    #[test]
    fn rref_drops_dependent_vector() {
        let basis = rref(&[v(0b011), v(0b110), v(0b101)]).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(
            span_elements(&basis, 3).unwrap(),
            span_elements(&[v(0b011), v(0b110)], 3).unwrap()
        );
        assert!(rref(&[]).unwrap().is_empty());
        assert_eq!(rref(&[v(0b111)]).unwrap(), vec![v(0b111)]);
    }

    #[test]
    fn span_examples() {
        let bits = |xs: Vec<BinVec>| xs.into_iter().map(|x| x.bits()).collect::<Vec<_>>();
        assert_eq!(bits(span_elements(&[v(1)], 3).unwrap()), vec![0, 1]);
        assert_eq!(bits(span_elements(&[v(1), v(2)], 3).unwrap()), vec![0, 1, 2, 3]);
        assert_eq!(bits(span_elements(&[], 3).unwrap()), vec![0]);
        assert!(span_elements(&[v(3), v(3)], 3).is_err());
    }

    #[test]
    fn flip_reverses_rows() {
        assert_eq!(BinVec::new(0b01, 2).unwrap().flip().bits(), 0b10);
        assert_eq!(flip_bits(0b0011, 4), 0b1100);
        assert_eq!(flip_bits(0b1, 1), 0b1);
    }

    #[test]
    fn text_round_trip_and_layout() {
        let g = example();
        let text = g.to_text();
        assert_eq!(text, "01001\n00111\n00001\n");
        assert_eq!(text.parse::<GeneratorMatrix>().unwrap(), g);
        let spaced: GeneratorMatrix = "# comment\n0 1 0 0 1\n\n00111\n00001\n".parse().unwrap();
        assert_eq!(spaced, g);
        assert!("011\n01\n".parse::<GeneratorMatrix>().is_err());
        assert!("012\n".parse::<GeneratorMatrix>().is_err());
    }

    fn exhaustive_rank(vs: &[u32]) -> usize {
        // The span has 2^rank distinct elements; list every subset sum.
        let n = vs.len();
        let sums: std::collections::BTreeSet<u32> = (0u32..(1 << n))
            .map(|subset| (0..n).filter(|j| subset >> j & 1 == 1).fold(0, |acc, j| acc ^ vs[j]))
            .collect();
        sums.len().trailing_zeros() as usize
    }

    proptest! {
        #[test]
        fn rank_matches_exhaustive_subset_check(kappa in 1usize..=6, raw in prop::collection::vec(any::<u32>(), 0..=8)) {
            let vs: Vec<u32> = raw.iter().map(|x| x & ((1 << kappa) - 1)).collect();
            prop_assert_eq!(rank_bits(vs.iter().copied()), exhaustive_rank(&vs));
        }

        #[test]
        fn rank_is_permutation_and_duplicate_invariant(raw in prop::collection::vec(0u32..64, 0..=8), seed in any::<u64>()) {
            let mut shuffled = raw.clone();
            let len = shuffled.len();
            if len > 1 {
                let mut s = seed;
                for i in (1..len).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    shuffled.swap(i, (s >> 33) as usize % (i + 1));
                }
            }
            let doubled: Vec<u32> = raw.iter().chain(raw.iter()).copied().collect();
            let r = rank_bits(raw.iter().copied());
            prop_assert_eq!(r, rank_bits(shuffled));
            prop_assert_eq!(r, rank_bits(doubled));
            prop_assert_eq!(r, rref_bits(raw.iter().copied()).len());
        }

        #[test]
        fn rref_is_canonical(raw in prop::collection::vec(0u32..64, 0..=8)) {
            let basis = rref_bits(raw.iter().copied());
            for w in basis.windows(2) {
                prop_assert!(w[0].leading_zeros() > w[1].leading_zeros());
            }
            for (i, &b) in basis.iter().enumerate() {
                let pivot = 31 - b.leading_zeros();
                for (j, &other) in basis.iter().enumerate() {
                    if i != j {
                        prop_assert_eq!((other >> pivot) & 1, 0);
                    }
                }
            }
            // Any other generating set of the same span reduces to the same basis.
            let span = span_bits(&basis);
            prop_assert_eq!(rref_bits(span.iter().copied()), basis);
        }

        #[test]
        fn text_format_round_trips(kappa in 1usize..=8, raw in prop::collection::vec(any::<u32>(), 1..=12)) {
            let cols = raw.iter().map(|x| x & ((1 << kappa) - 1)).collect();
            let g = GeneratorMatrix::new(kappa, cols).unwrap();
            prop_assert_eq!(g.to_text().parse::<GeneratorMatrix>().unwrap(), g);
        }
    }
}
