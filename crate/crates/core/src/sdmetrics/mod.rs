//! Secrecy metrics by subspace decomposition.
//!
//! Each subspace `S` of `F₂^κ` carries the column fraction `ζ(S)` and the
//! probability that every revealed column lies in `S`: `φ(S) = ε^{n(1−ζ)}`
//! for independent erasures, or `Φ(S) = ∏_{i<μ} (ζ − i/n)/(1 − i/n)` when
//! exactly `μ` positions are revealed. The probability `ψ(S)` that the revealed
//! columns span exactly `S` follows by subtracting the proper subspaces.
//!
//! The equivocation loss only needs `φ` summed per dimension with the weights
//! `K_δ`; the χ² divergence only needs the `2^κ − 1` hyperplanes.

pub mod constants;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::codes::kappa_of;
use crate::error::{usage, Result};
use crate::lattice::{hyperplane_parity, lattice, Lattice, Subspace, MAX_HYPERPLANE_KAPPA};
use crate::oracle::{ChannelParams, Method, Metric, MetricResult};
use crate::sum::Kahan;

pub use constants::{constants, k_constant, k_constant_f64, ConstantFamilies};

/// `Σ_{i : ν(i) ∈ S} q_i`.
pub fn zeta(s: &Subspace, q: &[f64]) -> f64 {
    zeta_of_elements(s.elements(), q)
}

fn zeta_of_elements(elements: &[u32], q: &[f64]) -> f64 {
    let mut acc = Kahan::new();
    for &v in elements {
        acc.add(q[v as usize]);
    }
    acc.value()
}

/// Exponents this close to zero are treated as exactly zero, so that
/// `0^{n(1−ζ)}` is 1 when `ζ` equals 1 up to rounding.
const EXPONENT_EPS: f64 = 1e-12;

/// `ε^{n(1−ζ)}`.
pub fn phi_eps(zeta: f64, n: usize, epsilon: f64) -> f64 {
    let e = n as f64 * (1.0 - zeta);
    if e.abs() < EXPONENT_EPS {
        1.0
    } else {
        epsilon.powf(e)
    }
}

/// `∏_{i=0}^{μ−1} (ζ − i/n)/(1 − i/n)`, evaluated as written (it is negative
/// for some unrealizable `q`).
#[allow(non_snake_case)]
pub fn Phi_mu(zeta: f64, n: usize, mu: usize) -> f64 {
    let nf = n as f64;
    (0..mu).fold(1.0, |acc, i| {
        let i = i as f64;
        acc * (zeta - i / nf) / (1.0 - i / nf)
    })
}

/// `(ε/(2−ε))^{n(1−ζ)}`, the per-hyperplane χ² term.
pub fn varphi(zeta: f64, n: usize, epsilon: f64) -> f64 {
    phi_eps(zeta, n, epsilon / (2.0 - epsilon))
}

/// The "all revealed columns lie in `S`" probability for a channel.
fn containment(params: &ChannelParams) -> impl Fn(f64) -> f64 + Sync {
    let p = *params;
    move |z| match p {
        ChannelParams::FixedEpsilon { n, epsilon } => phi_eps(z, n, epsilon),
        ChannelParams::FixedMu { n, mu } => Phi_mu(z, n, mu),
    }
}

fn check_params(params: &ChannelParams) -> Result<()> {
    if params.n() == 0 {
        return usage("blocklength n must be positive");
    }
    if let ChannelParams::FixedEpsilon { epsilon, .. } = *params {
        if !(0.0..=1.0).contains(&epsilon) {
            return usage(format!("epsilon {epsilon} outside [0, 1]"));
        }
    }
    Ok(())
}

const LAYER_CHUNK: usize = 1024;

/// `Σ_{S ∈ layer} f(ζ(S))` with a fixed chunking, so the result does not
/// depend on the number of workers.
fn layer_sum(layer: &[Subspace], q: &[f64], f: &(impl Fn(f64) -> f64 + Sync)) -> f64 {
    let partials: Vec<Kahan> = layer
        .par_chunks(LAYER_CHUNK)
        .map(|chunk| {
            let mut acc = Kahan::new();
            for s in chunk {
                acc.add(f(zeta(s, q)));
            }
            acc
        })
        .collect();
    partials.into_iter().fold(Kahan::new(), Kahan::merge).value()
}

/// `Σ_{δ=1}^{κ} K_δ Σ_{S ∈ Ξ(W, κ−δ)} f(ζ(S))` with `k[δ − 1] = K_δ`.
fn weighted_lattice_sum_with(
    lat: &Lattice,
    q: &[f64],
    k: &[f64],
    f: &(impl Fn(f64) -> f64 + Sync),
) -> f64 {
    let kappa = lat.kappa();
    let mut acc = Kahan::new();
    for delta in 1..=kappa {
        acc.add(k[delta - 1] * layer_sum(lat.layer(kappa - delta), q, f));
    }
    acc.value()
}

fn weighted_lattice_sum(lat: &Lattice, q: &[f64], f: &(impl Fn(f64) -> f64 + Sync)) -> f64 {
    let k: Vec<f64> = (1..=lat.kappa()).map(k_constant_f64).collect();
    weighted_lattice_sum_with(lat, q, &k, f)
}

fn result(metric: Metric, value: f64, params: ChannelParams, start: Instant) -> MetricResult {
    MetricResult {
        metric,
        method: Method::Subspace,
        value,
        params,
        runtime: start.elapsed(),
        notes: Vec::new(),
    }
}

/// Expected equivocation loss:
/// `n(1−ε) − κ + Σ_δ K_δ Σ_{S ∈ Ξ(W,κ−δ)} φ(S)` for independent erasures and
/// `μ − κ + Σ_δ K_δ Σ_S Φ(S)` for exactly `μ` revealed positions.
///
/// With `μ = 0` nothing is revealed; the loss is 0 by definition and the
/// result carries a note saying so.
pub fn equivocation_loss_sd(q: &[f64], params: ChannelParams) -> Result<MetricResult> {
    check_params(&params)?;
    let start = Instant::now();
    let kappa = kappa_of(q)?;
    if let ChannelParams::FixedMu { mu: 0, .. } = params {
        let mut r = result(Metric::EquivocationLoss, 0.0, params, start);
        r.notes
            .push("mu = 0 reveals nothing; loss is 0 by definition, not by the lattice sum".into());
        return Ok(r);
    }
    let k: Vec<f64> = (1..=kappa).map(k_constant_f64).collect();
    let value = equivocation_loss_with_constants(q, params, &k)?;
    Ok(result(Metric::EquivocationLoss, value, params, start))
}

/// [`equivocation_loss_sd`] with caller-supplied `k[δ − 1] = K_δ`, for
/// checking that the verification suites detect corrupted constants.
pub fn equivocation_loss_with_constants(q: &[f64], params: ChannelParams, k: &[f64]) -> Result<f64> {
    check_params(&params)?;
    let kappa = kappa_of(q)?;
    if k.len() < kappa {
        return usage(format!("need {kappa} constants, got {}", k.len()));
    }
    if let ChannelParams::FixedMu { mu: 0, .. } = params {
        return Ok(0.0);
    }
    let lat = lattice(kappa)?;
    let base = match params {
        ChannelParams::FixedEpsilon { n, epsilon } => n as f64 * (1.0 - epsilon),
        ChannelParams::FixedMu { mu, .. } => mu as f64,
    } - kappa as f64;
    Ok(base + weighted_lattice_sum_with(&lat, q, k, &containment(&params)))
}

/// Variable part of the equivocation loss, `Σ_δ K_δ Σ_S φ(S)`; the loss is
/// `n(1−ε) − κ` plus this.
pub fn equivocation_lattice_term(q: &[f64], n: usize, epsilon: f64) -> Result<f64> {
    let lat = lattice(kappa_of(q)?)?;
    Ok(weighted_lattice_sum(&lat, q, &|z| phi_eps(z, n, epsilon)))
}

/// `ψ` (or `Ψ` for fixed μ) of every subspace, indexed like
/// [`Lattice::layers`], computed bottom-up by dimension.
pub fn psi_table(q: &[f64], params: ChannelParams) -> Result<Vec<Vec<f64>>> {
    check_params(&params)?;
    let kappa = kappa_of(q)?;
    let lat = lattice(kappa)?;
    let f = containment(&params);
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(kappa + 1);
    for d in 0..=kappa {
        // Local subspace patterns of a d-dimensional space, mapped into each S.
        let local: Vec<Vec<Vec<u32>>> = if d == 0 {
            Vec::new()
        } else {
            let local_lat = lattice(d)?;
            (0..d)
                .map(|dp| local_lat.layer(dp).iter().map(|t| t.basis().to_vec()).collect())
                .collect()
        };
        let done = &table;
        let layer: Vec<f64> = lat
            .layer(d)
            .par_iter()
            .map(|s| {
                let mut acc = Kahan::new();
                acc.add(f(zeta(s, q)));
                for (dp, patterns) in local.iter().enumerate() {
                    for pattern in patterns {
                        let mapped = pattern.iter().map(|&local_v| {
                            (0..d)
                                .filter(|j| local_v >> j & 1 == 1)
                                .fold(0u32, |a, j| a ^ s.basis()[j])
                        });
                        let basis = crate::gf2::rref_bits(mapped);
                        let (dim, idx) = lat.locate(&basis).expect("sub-subspace is in the lattice");
                        debug_assert_eq!(dim, dp);
                        acc.add(-done[dim][idx]);
                    }
                }
                acc.value()
            })
            .collect();
        table.push(layer);
    }
    Ok(table)
}

/// `ψ(S)` (or `Ψ(S)`) for a single subspace.
pub fn psi(s: &Subspace, q: &[f64], params: ChannelParams) -> Result<f64> {
    let lat = lattice(kappa_of(q)?)?;
    if s.kappa() != lat.kappa() {
        return usage("subspace and q have different kappa");
    }
    let (d, idx) = lat.locate(s.basis()).expect("canonical subspace is in the lattice");
    Ok(psi_table(q, params)?[d][idx])
}

/// Expected rank of the revealed columns, `Σ_S dim(S) ψ(S)`.
pub fn expected_rank_sd(q: &[f64], n: usize, epsilon: f64) -> Result<f64> {
    let table = psi_table(q, ChannelParams::epsilon(n, epsilon)?)?;
    let mut acc = Kahan::new();
    for (d, layer) in table.iter().enumerate() {
        for &p in layer {
            acc.add(d as f64 * p);
        }
    }
    Ok(acc.value())
}

/// How [`chi2_sd`] obtains the hyperplane column fractions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HyperplanePath {
    /// Scan all `2^κ` elements for each hyperplane, `O(4^κ)`.
    Direct,
    /// One Walsh–Hadamard transform, `O(κ 2^κ)`.
    Transform,
}

/// In-place Walsh–Hadamard transform: `out[p] = Σ_v x_v (−1)^{p·v}`.
pub fn walsh_hadamard(x: &mut [f64]) {
    let len = x.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (x[j], x[j + h]);
                x[j] = a + b;
                x[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `ζ` of every hyperplane; entry `i − 1` belongs to hyperplane `i`.
pub fn hyperplane_zetas(q: &[f64], path: HyperplanePath) -> Result<Vec<f64>> {
    let kappa = kappa_of(q)?;
    match path {
        HyperplanePath::Direct => {
            crate::error::check_kappa_cap(kappa, MAX_HYPERPLANE_KAPPA, "direct hyperplane scan")?;
            Ok((1u32..(1 << kappa))
                .into_par_iter()
                .map(|i| {
                    let p = hyperplane_parity(kappa, i);
                    let mut acc = Kahan::new();
                    for v in 0u32..(1 << kappa) {
                        if (v & p).count_ones().is_multiple_of(2) {
                            acc.add(q[v as usize]);
                        }
                    }
                    acc.value()
                })
                .collect())
        }
        HyperplanePath::Transform => {
            // ζ(S_p) = Σ_{v : p·v = 0} q_v = (Σ_v q_v + Σ_v q_v (−1)^{p·v}) / 2.
            let mut w = q.to_vec();
            walsh_hadamard(&mut w);
            Ok((1u32..(1 << kappa))
                .map(|i| 0.5 * (w[0] + w[hyperplane_parity(kappa, i) as usize]))
                .collect())
        }
    }
}

/// χ² divergence between `p_MZ` and `p_M p_Z`:
/// `(2−ε)^n 2^{−κ} (1 + Σ_h φ̃(S_h)) − 1` with `φ̃ = (ε/(2−ε))^{n(1−ζ)}` for
/// independent erasures, `2^{μ−κ} (1 + Σ_h Φ(S_h)) − 1` for `μ` revealed.
pub fn chi2_sd(q: &[f64], params: ChannelParams, path: HyperplanePath) -> Result<MetricResult> {
    check_params(&params)?;
    let start = Instant::now();
    let kappa = kappa_of(q)?;
    let zetas = hyperplane_zetas(q, path)?;
    let value = chi2_from_hyperplane_zetas(&zetas, kappa, params);
    Ok(result(Metric::Chi2, value, params, start))
}

/// χ² divergence from precomputed hyperplane column fractions.
pub fn chi2_from_hyperplane_zetas(zetas: &[f64], kappa: usize, params: ChannelParams) -> f64 {
    let mut acc = Kahan::new();
    acc.add(1.0);
    match params {
        ChannelParams::FixedEpsilon { n, epsilon } => {
            for &z in zetas {
                acc.add(varphi(z, n, epsilon));
            }
            (2.0 - epsilon).powi(n as i32) * (-(kappa as f64)).exp2() * acc.value() - 1.0
        }
        ChannelParams::FixedMu { n, mu } => {
            for &z in zetas {
                acc.add(Phi_mu(z, n, mu));
            }
            (mu as f64 - kappa as f64).exp2() * acc.value() - 1.0
        }
    }
}

/// One row of the per-subspace breakdown.
#[derive(Clone, Debug, Serialize)]
pub struct SubspaceProfile {
    pub subspace: Subspace,
    pub zeta: f64,
    #[serde(rename = "Phi")]
    pub big_phi: f64,
    #[serde(rename = "Psi")]
    pub big_psi: f64,
    pub phi: f64,
    pub psi: f64,
}

/// `ζ, Φ, Ψ` (at `μ`) and `φ, ψ` (at `ε`) for every subspace, ordered by
/// dimension and then canonical basis.
pub fn profile_table(q: &[f64], n: usize, mu: usize, epsilon: f64) -> Result<Vec<SubspaceProfile>> {
    let kappa = kappa_of(q)?;
    let lat = lattice(kappa)?;
    let eps_params = ChannelParams::epsilon(n, epsilon)?;
    let mu_params = ChannelParams::mu(n, mu)?;
    let psi_e = psi_table(q, eps_params)?;
    let psi_m = psi_table(q, mu_params)?;
    let mut rows = Vec::with_capacity(lat.len());
    for (d, layer) in lat.layers().iter().enumerate() {
        for (j, s) in layer.iter().enumerate() {
            let z = zeta(s, q);
            rows.push(SubspaceProfile {
                subspace: s.clone(),
                zeta: z,
                big_phi: Phi_mu(z, n, mu),
                big_psi: psi_m[d][j],
                phi: phi_eps(z, n, epsilon),
                psi: psi_e[d][j],
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `subspace,zeta,Phi,Psi,phi,psi`; the subspace is written
/// as its element set, e.g. `{0,1,2,3}`.
pub fn profile_csv(rows: &[SubspaceProfile]) -> String {
    let mut out = String::from("subspace,zeta,Phi,Psi,phi,psi\n");
    for r in rows {
        let elems: Vec<String> = r.subspace.elements().iter().map(u32::to_string).collect();
        out.push_str(&format!(
            "\"{{{}}}\",{},{},{},{},{}\n",
            elems.join(","),
            r.zeta,
            r.big_phi,
            r.big_psi,
            r.phi,
            r.psi
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: [f64; 8] = [0.2, 0.2, 0.4, 0.0, 0.0, 0.0, 0.0, 0.2];

    #[test]
    fn zeta_examples() {
        let w = Subspace::full(3).unwrap();
        assert!((zeta(&w, &Q) - 1.0).abs() < 1e-15);
        let s = Subspace::span_of(3, [1, 2]).unwrap();
        assert!((zeta(&s, &Q) - 0.8).abs() < 1e-15);
        let t = Subspace::span_of(3, [3, 5]).unwrap();
        assert!((zeta(&t, &Q) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn phi_examples() {
        assert!((phi_eps(0.4, 5, 0.2) - 0.008).abs() < 1e-15);
        assert!((Phi_mu(0.6, 5, 2) - 0.3).abs() < 1e-15);
        assert_eq!(Phi_mu(1.0, 5, 2), 1.0);
        assert_eq!(phi_eps(0.4, 5, 0.0), 0.0);
        assert_eq!(phi_eps(1.0, 5, 0.0), 1.0);
    }

    #[test]
    fn psi_examples() {
        let eps = ChannelParams::epsilon(5, 0.2).unwrap();
        let s = Subspace::span_of(3, [1]).unwrap();
        assert!((psi(&s, &Q, eps).unwrap() - 0.0064).abs() < 1e-15);
        let w = Subspace::full(3).unwrap();
        assert!((psi(&w, &Q, eps).unwrap() - 0.6144).abs() < 1e-14);
        let mu = ChannelParams::mu(5, 2).unwrap();
        assert!(psi(&w, &Q, mu).unwrap().abs() < 1e-15);
    }

    #[test]
    fn worked_equivocation_and_rank() {
        let p = ChannelParams::epsilon(5, 0.2).unwrap();
        let l = equivocation_loss_sd(&Q, p).unwrap().value;
        assert!((l - 1.44).abs() < 1e-12, "{l}");
        let r = expected_rank_sd(&Q, 5, 0.2).unwrap();
        assert!((r - 2.56).abs() < 1e-12, "{r}");
    }

    #[test]
    fn mu_zero_is_flagged() {
        let r = equivocation_loss_sd(&Q, ChannelParams::mu(5, 0).unwrap()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn chi2_fixed_mu_example() {
        // Weight-2 patterns of the example code: 10 patterns, ranks from the
        // pattern table give Σ 2^{2−rank} = 15, so the average minus one is 0.5.
        let r = chi2_sd(&Q, ChannelParams::mu(5, 2).unwrap(), HyperplanePath::Direct).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn chi2_extremes() {
        for path in [HyperplanePath::Direct, HyperplanePath::Transform] {
            let r = chi2_sd(&Q, ChannelParams::epsilon(5, 1.0).unwrap(), path).unwrap();
            assert!(r.value.abs() < 1e-12);
        }
    }

    #[test]
    fn transform_matches_direct_sum() {
        let mut x = vec![0.0; 8];
        x[3] = 1.0;
        walsh_hadamard(&mut x);
        for (p, &val) in x.iter().enumerate() {
            let expected = if (p & 3).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            assert_eq!(val, expected);
        }
    }

    #[test]
    fn csv_layout() {
        let rows = profile_table(&Q, 5, 2, 0.2).unwrap();
        let csv = profile_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("subspace,zeta,Phi,Psi,phi,psi"));
        assert!(lines.next().unwrap().starts_with("\"{0}\",0.2,"));
        assert_eq!(rows.len(), 16);
    }
}
