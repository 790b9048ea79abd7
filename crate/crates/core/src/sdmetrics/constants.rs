//! Integer constant families of the subspace-decomposition formulas and the
//! sign identities they satisfy.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::lattice::gaussian_binomial;

fn pow2(e: usize) -> BigInt {
    BigInt::one() << e
}

fn gbin(a: i64, b: i64) -> BigInt {
    BigInt::from(gaussian_binomial(a, b))
}

/// `K_δ = ∏_{i=1}^{δ−1} (1 − 2^i)`; `K_1 = 1`.
pub fn k_constant(delta: usize) -> BigInt {
    (1..delta).fold(BigInt::one(), |acc, i| acc * (BigInt::one() - pow2(i)))
}

/// `c(d, d′) = (−1)^{d−d′} 2^{(d−d′)(d−d′−1)/2}` for `d ≥ d′`, else 0.
pub fn c_constant(d: usize, d_prime: usize) -> BigInt {
    if d < d_prime {
        return BigInt::zero();
    }
    let k = d - d_prime;
    let magnitude = pow2(k * k.saturating_sub(1) / 2);
    if k % 2 == 1 {
        -magnitude
    } else {
        magnitude
    }
}

/// `η′(a, b) = binom(a, b)₂ (−1)^{a−b} 2^{(a−b)(a−b−1)/2}`.
pub fn eta_prime(a: usize, b: usize) -> BigInt {
    if b > a {
        return BigInt::zero();
    }
    gbin(a as i64, b as i64) * c_constant(a, b)
}

/// `C(κ, d) = Σ_{i=d}^{κ} i · binom(κ−d, i−d)₂ · c(i, d)`; `K_δ = −C(κ, κ−δ)`.
pub fn big_c_constant(kappa: usize, d: usize) -> BigInt {
    (d..=kappa)
        .map(|i| {
            BigInt::from(i) * gbin((kappa - d) as i64, (i - d) as i64) * c_constant(i, d)
        })
        .sum()
}

/// `Σ_{i=d}^{κ} 2^{−i} binom(κ−d, i−d)₂ c(i, d)`, the χ² weighting constant
/// with the common `2^μ` factor removed.
pub fn gamma_sum(kappa: usize, d: usize) -> BigRational {
    (d..=kappa)
        .map(|i| {
            let num = gbin((kappa - d) as i64, (i - d) as i64) * c_constant(i, d);
            BigRational::new(num, pow2(i))
        })
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Collapsed form of [`gamma_sum`]: `2^{−κ}` for `d ∈ {κ, κ−1}`, else 0.
pub fn gamma_closed(kappa: usize, d: usize) -> BigRational {
    if d == kappa || d + 1 == kappa {
        BigRational::new(BigInt::one(), pow2(kappa))
    } else {
        BigRational::zero()
    }
}

/// Tables of every constant family for one κ.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantFamilies {
    pub kappa: usize,
    /// `k[δ − 1] = K_δ` for `δ = 1..=κ`.
    #[serde(serialize_with = "as_strings")]
    pub k: Vec<BigInt>,
    /// `eta_prime[a][b]` for `0 ≤ b ≤ a ≤ κ`.
    #[serde(serialize_with = "as_string_rows")]
    pub eta_prime: Vec<Vec<BigInt>>,
    /// `c[d][d′]` for `0 ≤ d′ ≤ d ≤ κ`.
    #[serde(serialize_with = "as_string_rows")]
    pub c: Vec<Vec<BigInt>>,
    /// `gamma_sum[d]`, evaluated term by term.
    #[serde(serialize_with = "as_strings")]
    pub gamma_sum: Vec<BigRational>,
    /// `gamma_closed[d]`, the collapsed form.
    #[serde(serialize_with = "as_strings")]
    pub gamma_closed: Vec<BigRational>,
}

// Exact values are written as decimal strings ("-3", "1/16") to keep them exact in JSON.
fn as_strings<T: std::fmt::Display, S: serde::Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn as_string_rows<T: std::fmt::Display, S: serde::Serializer>(
    v: &[Vec<T>],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
}

/// Builds [`ConstantFamilies`] for `κ ≤ 16`.
pub fn constants(kappa: usize) -> crate::Result<ConstantFamilies> {
    if kappa > 16 {
        return crate::error::usage(format!("constant tables support kappa <= 16, got {kappa}"));
    }
    Ok(ConstantFamilies {
        kappa,
        k: (1..=kappa).map(k_constant).collect(),
        eta_prime: (0..=kappa)
            .map(|a| (0..=a).map(|b| eta_prime(a, b)).collect())
            .collect(),
        c: (0..=kappa)
            .map(|d| (0..=d).map(|dp| c_constant(d, dp)).collect())
            .collect(),
        gamma_sum: (0..=kappa).map(|d| gamma_sum(kappa, d)).collect(),
        gamma_closed: (0..=kappa).map(|d| gamma_closed(kappa, d)).collect(),
    })
}

/// `K_δ` as a float, for the real-valued sums.
pub fn k_constant_f64(delta: usize) -> f64 {
    k_constant(delta).to_f64().unwrap_or(f64::NAN)
}

/// `Σ_{i=0}^{a} η′(a, i)`; equals `[a = 0]`.
pub fn eta_row_sum(a: usize) -> BigInt {
    (0..=a).map(|i| eta_prime(a, i)).sum()
}

/// `Σ_{i=b}^{a} η′(a, i)`; equals `2^{a−b} η′(a−1, b−1)` for `0 < b ≤ a`.
pub fn eta_partial_sum(a: usize, b: usize) -> BigInt {
    (b..=a).map(|i| eta_prime(a, i)).sum()
}

/// `Σ_{i=b}^{a} binom(a, i)₂ η′(i, b)`; equals `[a = b]`.
pub fn eta_weighted_sum(a: usize, b: usize) -> BigInt {
    (b..=a)
        .map(|i| gbin(a as i64, i as i64) * eta_prime(i, b))
        .sum()
}

/// `Σ_{j=1}^{a} j · η′(a, j)`; equals `K_a`.
pub fn eta_moment(a: usize) -> BigInt {
    (1..=a).map(|j| BigInt::from(j) * eta_prime(a, j)).sum()
}

fn mersenne_product(from: usize, to: usize) -> BigInt {
    (from..=to).fold(BigInt::one(), |acc, j| acc * (BigInt::one() - pow2(j)))
}

/// `Σ_{i=0}^{n} 2^{b i} ∏_{j=i}^{n} (1 − 2^j)`, negative for `b, n > 0`.
pub fn mersenne_exponential_sum(b: usize, n: usize) -> BigInt {
    (0..=n).map(|i| pow2(b * i) * mersenne_product(i, n)).sum()
}

/// Base of the superexponential sum.
#[derive(Clone, Debug)]
pub enum Beta {
    /// An exact rational `β ≥ 1`.
    Rational(BigRational),
    /// Euler's number.
    E,
}

/// Sign of `Σ_{i=0}^{n} 2^i β^{2^i} ∏_{j=i}^{n} (1 − 2^j)`, negative for
/// `β ≥ 1`, `n > 0`.
///
/// Rational bases are summed exactly. For `e`, whose powers overflow a float
/// already at `n = 10`, positive and negative terms are accumulated separately
/// in log space and compared.
pub fn superexponential_sign(beta: &Beta, n: usize) -> Ordering {
    match beta {
        Beta::Rational(b) => {
            let total = (0..=n)
                .map(|i| {
                    let power = num_traits::pow(b.clone(), 1usize << i);
                    power * BigRational::from_integer(pow2(i) * mersenne_product(i, n))
                })
                .fold(BigRational::zero(), |acc, x| acc + x);
            total.cmp(&BigRational::zero())
        }
        Beta::E => {
            let mut pos: Vec<f64> = Vec::new();
            let mut neg: Vec<f64> = Vec::new();
            for i in 0..=n {
                let product = mersenne_product(i, n);
                if product.is_zero() {
                    continue;
                }
                let log = (i as f64) * std::f64::consts::LN_2
                    + (1u64 << i) as f64
                    + ln_abs_bigint(&product);
                match product.sign() {
                    Sign::Plus => pos.push(log),
                    _ => neg.push(log),
                }
            }
            let lp = log_sum_exp(&pos);
            let ln = log_sum_exp(&neg);
            lp.partial_cmp(&ln).unwrap_or(Ordering::Equal)
        }
    }
}

fn ln_abs_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let Some(max) = logs.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_values() {
        let ks: Vec<i64> = (1..=4).map(|d| k_constant(d).to_i64().unwrap()).collect();
        assert_eq!(ks, vec![1, -1, 3, -21]);
    }

    #[test]
    fn eta_row_two() {
        let row: Vec<i64> = (0..=2).map(|i| eta_prime(2, i).to_i64().unwrap()).collect();
        assert_eq!(row, vec![2, -3, 1]);
        assert!(eta_row_sum(2).is_zero());
    }

    #[test]
    fn big_c_gives_k() {
        for kappa in 1..=10 {
            for delta in 1..=kappa {
                assert_eq!(k_constant(delta), -big_c_constant(kappa, kappa - delta));
            }
        }
    }

    #[test]
    fn tables_have_expected_shape() {
        let t = constants(4).unwrap();
        assert_eq!(t.k.len(), 4);
        assert_eq!(t.eta_prime[4].len(), 5);
        assert_eq!(t.gamma_sum, t.gamma_closed);
        assert!(constants(17).is_err());
    }

    #[test]
    fn mersenne_small_case() {
        // n = 1, b = 1: i = 0 term vanishes, i = 1 term is 2 · (1 − 2) = −2.
        assert_eq!(mersenne_exponential_sum(1, 1), BigInt::from(-2));
    }
}
