//! Numerical checks of the optimality properties of the uniform and subspace
//! exclusion constructions.
//!
//! Local optimality is tested by projecting the analytic gradient onto the
//! tangent space of the active constraints and by measuring curvature along
//! random tangent directions. Global optimality of the χ² divergence is tested
//! by sampling feasible points and comparing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{hyperplane_exclusion, kappa_of, rho_magnitude, subspace_exclusion, uniform_fraction};
use crate::error::{usage, Error, Result};
use crate::gf2::flip_bits;
use crate::lattice::{lattice, Lattice};
use crate::oracle::ChannelParams;
use crate::sdmetrics::{
    chi2_from_hyperplane_zetas, equivocation_lattice_term, hyperplane_zetas, k_constant_f64,
    phi_eps, psi_table, varphi, walsh_hadamard, zeta, HyperplanePath,
};
use crate::sum::Kahan;

/// Largest κ for gradient-based probes.
pub const MAX_PROBE_KAPPA: usize = 6;

/// Tolerance used when checking that a point satisfies a constraint set.
const FEASIBILITY_TOL: f64 = 1e-9;

/// Constraints on `q`. The unit-sum constraint is always active.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintSet {
    pub nonnegativity: bool,
    /// `q₀ = 0` held fixed.
    pub zero_column_pinned: bool,
    /// `|q − q̄| = |ρ(u)|` for the given `u`.
    pub radius_u: Option<usize>,
    /// `|q − q̌^{[S]}| ≥ |q̌^{u} − q̌^{κ−1}|` for every hyperplane `S`, for the
    /// given `u`.
    pub min_dist_from_first_secs_u: Option<usize>,
}

impl ConstraintSet {
    /// Unit sum and nonnegativity with the zero column pinned.
    pub fn reduced_simplex() -> Self {
        Self {
            nonnegativity: true,
            zero_column_pinned: true,
            radius_u: None,
            min_dist_from_first_secs_u: None,
        }
    }

    /// Unit sum and nonnegativity over every entry including `q₀`.
    pub fn full_simplex() -> Self {
        Self { zero_column_pinned: false, ..Self::reduced_simplex() }
    }

    /// Reduced simplex intersected with the sphere of radius `|ρ(u)|` about `q̄`.
    pub fn sphere(u: usize) -> Self {
        Self { radius_u: Some(u), ..Self::reduced_simplex() }
    }

    /// [`Self::sphere`] plus the minimum distance from every first exclusion code.
    pub fn sphere_with_min_dist(u: usize) -> Self {
        Self { min_dist_from_first_secs_u: Some(u), ..Self::sphere(u) }
    }

    /// Reports the first violated constraint, if any.
    pub fn check(&self, q: &[f64]) -> Result<()> {
        let kappa = kappa_of(q)?;
        let total: f64 = crate::sum::kahan_sum(q.iter().copied());
        if (total - 1.0).abs() > FEASIBILITY_TOL {
            return usage(format!("q sums to {total}"));
        }
        if self.nonnegativity {
            if let Some(i) = q.iter().position(|&x| x < -FEASIBILITY_TOL) {
                return usage(format!("q[{i}] = {} is negative", q[i]));
            }
        }
        if self.zero_column_pinned && q[0].abs() > FEASIBILITY_TOL {
            return usage(format!("q[0] = {} but the zero column is pinned", q[0]));
        }
        if let Some(u) = self.radius_u {
            let r = distance(q, uniform_fraction(kappa)?.q());
            let target = rho_magnitude(kappa, u);
            if (r - target).abs() > FEASIBILITY_TOL {
                return usage(format!("|q - q_bar| = {r}, expected {target}"));
            }
        }
        if let Some(u) = self.min_dist_from_first_secs_u {
            if min_dist_slack(q, kappa, u)? < -FEASIBILITY_TOL {
                return usage("q is too close to a first subspace exclusion code");
            }
        }
        Ok(())
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Every first exclusion code `q̌^{[S]}` with the bound `|q̌^{u} − q̌^{κ−1}|`.
struct MinDist {
    codes: Vec<Vec<f64>>,
    bound: f64,
}

impl MinDist {
    fn new(kappa: usize, u: usize) -> Result<Self> {
        let bound = distance(subspace_exclusion(kappa, u)?.q(), subspace_exclusion(kappa, kappa - 1)?.q());
        let codes = (1u32..(1 << kappa))
            .map(|i| Ok(hyperplane_exclusion(kappa, i)?.into_vec()))
            .collect::<Result<_>>()?;
        Ok(Self { codes, bound })
    }

    /// `min_S |q − q̌^{[S]}| − bound`.
    fn slack(&self, q: &[f64]) -> f64 {
        self.codes.iter().map(|c| distance(q, c)).fold(f64::INFINITY, f64::min) - self.bound
    }
}

fn min_dist_slack(q: &[f64], kappa: usize, u: usize) -> Result<f64> {
    Ok(MinDist::new(kappa, u)?.slack(q))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "epsilon must lie strictly inside (0, 1) for derivatives, got {epsilon}"
        )));
    }
    Ok(())
}

fn probe_lattice(q: &[f64]) -> Result<std::sync::Arc<Lattice>> {
    let kappa = kappa_of(q)?;
    if kappa > MAX_PROBE_KAPPA {
        return Err(Error::Resource(format!("gradient probes support kappa <= {MAX_PROBE_KAPPA}")));
    }
    lattice(kappa)
}

/// Analytic gradient of the equivocation loss with respect to every `q_i`:
/// `−n ln ε Σ_δ K_δ Σ_{S ∋ ν(i), dim S = κ−δ} φ(S)`.
pub fn gradient_equivocation(q: &[f64], n: usize, epsilon: f64) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    let lat = probe_lattice(q)?;
    let kappa = lat.kappa();
    let mut acc = vec![Kahan::new(); q.len()];
    for delta in 1..=kappa {
        let k = k_constant_f64(delta);
        for s in lat.layer(kappa - delta) {
            let w = k * phi_eps(zeta(s, q), n, epsilon);
            for &v in s.elements() {
                acc[v as usize].add(w);
            }
        }
    }
    let scale = -(n as f64) * epsilon.ln();
    Ok(acc.iter().map(|a| scale * a.value()).collect())
}

/// Gradient component at `q̄` for any `i ≥ 1`, in closed form:
/// `−n ln ε Σ_δ K_δ binom(κ−1, δ)₂ ε^{n(2^κ − 2^{κ−δ})/(2^κ − 1)}`.
pub fn gradient_at_uniform(kappa: usize, n: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let t = n as f64 * epsilon.ln();
    let two_k = (1u64 << kappa) as f64;
    let mut acc = Kahan::new();
    for delta in 1..=kappa {
        let count = crate::lattice::gaussian_binomial_f64(kappa as i64 - 1, delta as i64);
        let frac = (two_k - (1u64 << (kappa - delta)) as f64) / (two_k - 1.0);
        acc.add(k_constant_f64(delta) * count * (t * frac).exp());
    }
    Ok(-t * acc.value())
}

/// `dᵀ H d` for the Hessian `H` of the equivocation loss:
/// `(n ln ε)² Σ_δ K_δ Σ_S φ(S) (Σ_{i ∈ S} d_i)²`.
pub fn directional_second_derivative(q: &[f64], n: usize, epsilon: f64, d: &[f64]) -> Result<f64> {
    check_epsilon(epsilon)?;
    let lat = probe_lattice(q)?;
    if d.len() != q.len() {
        return usage("direction and q differ in length");
    }
    let kappa = lat.kappa();
    let mut acc = Kahan::new();
    for delta in 1..=kappa {
        let k = k_constant_f64(delta);
        for s in lat.layer(kappa - delta) {
            let slope = zeta(s, d);
            acc.add(k * phi_eps(zeta(s, q), n, epsilon) * slope * slope);
        }
    }
    let t = n as f64 * epsilon.ln();
    Ok(t * t * acc.value())
}

/// Rate of change of the equivocation loss when columns move out of the
/// zero column, i.e. along `q̀ = q − e₀`.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroColumnDerivative {
    /// `Σ_d ὼ(d)`.
    pub value: f64,
    /// `ὼ(d) = n ln ε Σ_{T ∈ Ξ(W,d)} (1 − ζ(T)) ψ(T)` for `d = 0..κ−1`.
    pub per_dimension: Vec<f64>,
    /// The same derivative as `∇l · q̀`, from the `φ` form.
    pub gradient_form: f64,
}

fn check_zero_column(q: &[f64]) -> Result<()> {
    if !(q[0] > 0.0 && q[0] < 1.0) {
        return Err(Error::Domain(format!(
            "the zero-column direction needs 0 < q0 < 1, got q0 = {}",
            q[0]
        )));
    }
    Ok(())
}

/// Directional derivative of the equivocation loss along `q − e₀`; negative
/// whenever `0 < q₀ < 1`.
pub fn zero_column_derivative(q: &[f64], n: usize, epsilon: f64) -> Result<ZeroColumnDerivative> {
    check_epsilon(epsilon)?;
    check_zero_column(q)?;
    let lat = probe_lattice(q)?;
    let kappa = lat.kappa();
    let t = n as f64 * epsilon.ln();
    let psi = psi_table(q, ChannelParams::epsilon(n, epsilon)?)?;
    let per_dimension: Vec<f64> = (0..kappa)
        .map(|d| {
            let mut acc = Kahan::new();
            for (s, &p) in lat.layer(d).iter().zip(&psi[d]) {
                acc.add((1.0 - zeta(s, q)) * p);
            }
            t * acc.value()
        })
        .collect();
    let mut grad_form = Kahan::new();
    for delta in 1..=kappa {
        let k = k_constant_f64(delta);
        for s in lat.layer(kappa - delta) {
            let z = zeta(s, q);
            grad_form.add(k * (1.0 - z) * phi_eps(z, n, epsilon));
        }
    }
    Ok(ZeroColumnDerivative {
        value: crate::sum::kahan_sum(per_dimension.iter().copied()),
        per_dimension,
        gradient_form: t * grad_form.value(),
    })
}

/// Rate of change of the χ² divergence along `q − e₀`.
#[derive(Clone, Debug, Serialize)]
pub struct Chi2ZeroColumnDerivative {
    pub value: f64,
    /// Per-hyperplane contributions, each nonpositive.
    pub terms: Vec<f64>,
}

/// `(2−ε)^n 2^{−κ} Σ_h n ln(ε/(2−ε)) (1 − ζ(S_h)) φ̃(S_h)`; negative whenever
/// `0 < q₀ < 1`. The case `q₀ = 1` has no columns to move and is rejected.
pub fn chi2_zero_column_derivative(q: &[f64], n: usize, epsilon: f64) -> Result<Chi2ZeroColumnDerivative> {
    check_epsilon(epsilon)?;
    check_zero_column(q)?;
    let kappa = kappa_of(q)?;
    let zetas = hyperplane_zetas(q, HyperplanePath::Transform)?;
    let lead = (2.0 - epsilon).powi(n as i32) * (-(kappa as f64)).exp2();
    let t = n as f64 * (epsilon / (2.0 - epsilon)).ln();
    let terms: Vec<f64> = zetas
        .iter()
        .map(|&z| lead * t * (1.0 - z) * varphi(z, n, epsilon))
        .collect();
    Ok(Chi2ZeroColumnDerivative { value: crate::sum::kahan_sum(terms.iter().copied()), terms })
}

/// `ξ_i = ζ(S_i)` for every hyperplane `S_i`.
pub fn xi_transform(q: &[f64]) -> Result<Vec<f64>> {
    hyperplane_zetas(q, HyperplanePath::Transform)
}

/// Inverse of [`xi_transform`] on vectors with `q₀ = 0` (needs `κ ≥ 2`).
pub fn xi_inverse(xi: &[f64]) -> Result<Vec<f64>> {
    let len = xi.len() + 1;
    let kappa = kappa_of(&vec![0.0; len])?;
    if kappa < 2 {
        return usage("the hyperplane transform is invertible only for kappa >= 2");
    }
    // With q₀ = 0, Σ ξ = (2^{κ−1} − 1) Σ q, and ξ_i = (Σ q + Ŵ[flip(i)]) / 2.
    let total = crate::sum::kahan_sum(xi.iter().copied()) / ((1u64 << (kappa - 1)) - 1) as f64;
    let mut w = vec![0.0; len];
    w[0] = total;
    for (idx, &x) in xi.iter().enumerate() {
        w[flip_bits(idx as u32 + 1, kappa) as usize] = 2.0 * x - total;
    }
    walsh_hadamard(&mut w);
    let scale = 1.0 / len as f64;
    Ok(w.into_iter().map(|x| x * scale).collect())
}

/// Result of a local stationarity test.
#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    pub constraints: ConstraintSet,
    pub projected_gradient_norm: f64,
    /// Smallest second difference over the sampled directions.
    pub min_curvature: f64,
    /// Smallest analytic curvature over the same directions.
    pub min_curvature_analytic: f64,
    /// Largest gap between the two curvature estimates, relative to scale.
    pub max_curvature_discrepancy: f64,
    pub directions: usize,
    pub seed: u64,
}

/// Orthonormal normals of the active equality constraints, restricted to the
/// free coordinates.
fn constraint_normals(q: &[f64], constraints: &ConstraintSet, free: &[bool]) -> Result<Vec<Vec<f64>>> {
    let kappa = kappa_of(q)?;
    let count = free.iter().filter(|&&f| f).count() as f64;
    let ones: Vec<f64> = free.iter().map(|&f| if f { 1.0 / count.sqrt() } else { 0.0 }).collect();
    let mut normals = vec![ones];
    if constraints.radius_u.is_some() {
        let bar = uniform_fraction(kappa)?;
        let mut e: Vec<f64> = q
            .iter()
            .zip(bar.q())
            .zip(free)
            .map(|((a, b), &f)| if f { a - b } else { 0.0 })
            .collect();
        let c = dot(&e, &normals[0]);
        for (x, o) in e.iter_mut().zip(&normals[0]) {
            *x -= c * o;
        }
        let norm = dot(&e, &e).sqrt();
        if norm > 0.0 {
            normals.push(e.into_iter().map(|x| x / norm).collect());
        }
    }
    Ok(normals)
}

fn project(v: &mut [f64], normals: &[Vec<f64>], free: &[bool]) {
    for (x, &f) in v.iter_mut().zip(free) {
        if !f {
            *x = 0.0;
        }
    }
    for nrm in normals {
        let c = dot(v, nrm);
        for (x, o) in v.iter_mut().zip(nrm) {
            *x -= c * o;
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_tangent(rng: &mut ChaCha8Rng, normals: &[Vec<f64>], free: &[bool]) -> Vec<f64> {
    loop {
        let mut d: Vec<f64> = free
            .iter()
            .map(|_| StandardNormal.sample(&mut *rng))
            .collect();
        project(&mut d, normals, free);
        let norm = dot(&d, &d).sqrt();
        if norm > 1e-12 {
            return d.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Projected gradient norm and sampled curvature of the equivocation loss at
/// `q` under `constraints`.
///
/// Without a radius constraint the curvature is the second derivative along
/// the straight line `q + s d`. With one, the path is the great circle through
/// `q` on the sphere about `q̄` with unit tangent `d`; its second derivative
/// includes the inward acceleration term `−∇l · (q − q̄)/r`. Both are estimated
/// by central second differences of the lattice sum and also evaluated
/// analytically.
pub fn stationarity_probe(
    q: &[f64],
    n: usize,
    epsilon: f64,
    constraints: &ConstraintSet,
    directions: usize,
    seed: u64,
) -> Result<StationarityReport> {
    check_epsilon(epsilon)?;
    constraints.check(q)?;
    let kappa = kappa_of(q)?;
    if kappa < 2 {
        return usage("stationarity probes need kappa >= 2");
    }
    let free: Vec<bool> = (0..q.len()).map(|i| !(constraints.zero_column_pinned && i == 0)).collect();
    let normals = constraint_normals(q, constraints, &free)?;
    let grad = gradient_equivocation(q, n, epsilon)?;
    let mut pg = grad.clone();
    project(&mut pg, &normals, &free);
    let projected_gradient_norm = dot(&pg, &pg).sqrt();

    let bar = uniform_fraction(kappa)?;
    let radius = constraints.radius_u.map(|u| rho_magnitude(kappa, u));
    let outward: Option<Vec<f64>> = radius.map(|r| {
        q.iter().zip(bar.q()).map(|(a, b)| (a - b) / r).collect()
    });
    let step = 1e-3 / (1.0 + n as f64 * epsilon.ln().abs());
    let f = |x: &[f64]| equivocation_lattice_term(x, n, epsilon);

    let samples: Vec<Result<(f64, f64)>> = (0..directions as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let d = random_tangent(&mut rng, &normals, &free);
            let hd = directional_second_derivative(q, n, epsilon, &d)?;
            let (analytic, fd) = match (radius, &outward) {
                (Some(r), Some(e)) => {
                    let point = |s: f64| -> Vec<f64> {
                        let theta = s / r;
                        (0..q.len())
                            .map(|j| bar.q()[j] + r * (theta.cos() * e[j] + theta.sin() * d[j]))
                            .collect()
                    };
                    let analytic = hd - dot(&grad, e) / r;
                    let fd = (f(&point(step))? - 2.0 * f(&point(0.0))? + f(&point(-step))?)
                        / (step * step);
                    (analytic, fd)
                }
                _ => {
                    let point = |s: f64| -> Vec<f64> {
                        q.iter().zip(&d).map(|(a, b)| a + s * b).collect()
                    };
                    let fd = (f(&point(step))? - 2.0 * f(q)? + f(&point(-step))?) / (step * step);
                    (hd, fd)
                }
            };
            Ok((analytic, fd))
        })
        .collect();
    let mut min_curvature = f64::INFINITY;
    let mut min_curvature_analytic = f64::INFINITY;
    let mut max_curvature_discrepancy: f64 = 0.0;
    for s in samples {
        let (a, fd) = s?;
        min_curvature = min_curvature.min(fd);
        min_curvature_analytic = min_curvature_analytic.min(a);
        max_curvature_discrepancy = max_curvature_discrepancy.max((a - fd).abs() / a.abs().max(1e-300));
    }
    Ok(StationarityReport {
        constraints: constraints.clone(),
        projected_gradient_norm,
        min_curvature,
        min_curvature_analytic,
        max_curvature_discrepancy,
        directions,
        seed,
    })
}

/// Candidate code of a global probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Uniform,
    /// Subspace exclusion code excluding the span of the first `u` unit vectors.
    Sec(usize),
}

impl Construction {
    pub fn q(self, kappa: usize) -> Result<Vec<f64>> {
        Ok(match self {
            Construction::Uniform => uniform_fraction(kappa)?.into_vec(),
            Construction::Sec(u) => subspace_exclusion(kappa, u)?.into_vec(),
        })
    }

    /// The constraint set under which the construction is claimed optimal,
    /// optionally without the minimum-distance constraint.
    pub fn constraints(self, kappa: usize, with_min_dist: bool) -> ConstraintSet {
        match self {
            Construction::Uniform => ConstraintSet::full_simplex(),
            Construction::Sec(u) if with_min_dist && u + 1 < kappa => {
                ConstraintSet::sphere_with_min_dist(u)
            }
            Construction::Sec(u) => ConstraintSet::sphere(u),
        }
    }
}

/// Outcome of a sampling probe of χ² optimality.
#[derive(Clone, Debug, Serialize)]
pub struct GlobalProbeReport {
    pub construction: Construction,
    pub constraints: ConstraintSet,
    pub kappa: usize,
    pub n: usize,
    pub epsilon: f64,
    /// Feasible samples compared against the candidate.
    pub samples: usize,
    /// Samples with a strictly smaller χ² divergence than the candidate.
    pub violations: usize,
    /// Smallest `λ(sample) − λ(candidate)`.
    pub min_margin: f64,
    pub candidate_value: f64,
    /// Draws rejected for infeasibility.
    pub rejected: u64,
    /// Samples for which no feasible draw was found within the attempt cap.
    pub exhausted: usize,
    pub seed: u64,
}

/// Draws per sample before giving up.
const MAX_ATTEMPTS: u64 = 20_000;

/// Point at distance `r` from `center` along the ray through `x`.
fn radial(center: &[f64], x: &[f64], r: f64) -> Vec<f64> {
    let norm = distance(center, x).max(f64::MIN_POSITIVE);
    center.iter().zip(x).map(|(c, v)| c + r * (v - c) / norm).collect()
}

fn dirichlet(rng: &mut ChaCha8Rng, len: usize, skip_zero: bool) -> Vec<f64> {
    let mut x: Vec<f64> = (0..len)
        .map(|i| if skip_zero && i == 0 { 0.0 } else { Exp1.sample(&mut *rng) })
        .collect();
    let s: f64 = x.iter().sum();
    for v in &mut x {
        *v /= s;
    }
    x
}

/// Compares `λ(candidate)` with `λ` at `samples` feasible points.
///
/// For the uniform code the feasible set is the full simplex: half the samples
/// are uniform on it and half lie on segments from `q̄` toward uniform points
/// at log-uniform distances. For exclusion codes the feasible set is the
/// sphere of radius `|ρ(u)|` about `q̄` within the reduced simplex (plus the
/// minimum-distance constraint when `with_min_dist` is set), with samples
/// split evenly over four draws: a uniformly random tangent direction; a
/// uniform point of the reduced simplex projected radially onto the sphere,
/// which keeps most draws nonnegative; a point on the segment from the
/// candidate toward a uniform point, at log-uniform distance, projected
/// radially; and a point on the arc from the candidate toward a random first
/// exclusion code, at log-uniform distance. The last draw covers the thin
/// regions where exclusion codes with `u < κ − 1` lose to their neighbours.
/// Infeasible draws are rejected.
#[allow(clippy::too_many_arguments)]
pub fn chi2_global_probe(
    kappa: usize,
    n: usize,
    epsilon: f64,
    construction: Construction,
    with_min_dist: bool,
    samples: usize,
    seed: u64,
) -> Result<GlobalProbeReport> {
    if kappa < 2 {
        return usage("global probes need kappa >= 2");
    }
    if kappa > crate::lattice::MAX_HYPERPLANE_KAPPA {
        return Err(Error::Resource(format!(
            "global probes support kappa <= {}",
            crate::lattice::MAX_HYPERPLANE_KAPPA
        )));
    }
    if !(0.0..1.0).contains(&epsilon) || n == 0 {
        return usage("need n > 0 and 0 <= epsilon < 1");
    }
    let candidate = construction.q(kappa)?;
    let constraints = construction.constraints(kappa, with_min_dist);
    let params = ChannelParams::epsilon(n, epsilon)?;
    let lambda = |x: &[f64]| -> Result<f64> {
        Ok(chi2_from_hyperplane_zetas(&hyperplane_zetas(x, HyperplanePath::Transform)?, kappa, params))
    };
    let candidate_value = lambda(&candidate)?;
    let bar = uniform_fraction(kappa)?.into_vec();
    let len = 1usize << kappa;
    let radius = constraints.radius_u.map(|u| rho_magnitude(kappa, u));
    let free: Vec<bool> = (0..len).map(|i| i != 0).collect();
    let normals = constraint_normals(&bar, &ConstraintSet::reduced_simplex(), &free)?;
    let tol = 1e-12 * candidate_value.abs().max(1.0);
    // Offsets from q̄ toward every first exclusion code, scaled to the sphere.
    let arcs: Vec<Vec<f64>> = match radius {
        Some(r) => (1u32..(1 << kappa))
            .map(|i| {
                let h = hyperplane_exclusion(kappa, i)?.into_vec();
                let norm = distance(&h, &bar);
                Ok(h.iter().zip(&bar).map(|(a, b)| r * (a - b) / norm).collect())
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let min_dist = constraints
        .min_dist_from_first_secs_u
        .map(|u| MinDist::new(kappa, u))
        .transpose()?;

    let results: Vec<Result<(Option<f64>, u64)>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            for attempt in 0..MAX_ATTEMPTS {
                // Draw kinds rotate per attempt so an infeasible kind falls through.
                let kind = i + attempt;
                let local = kind % 2 == 1;
                let x: Vec<f64> = match radius {
                    None => {
                        let p = dirichlet(&mut rng, len, false);
                        if local {
                            let t = 10f64.powf(-4.0 * rng.random::<f64>());
                            bar.iter().zip(&p).map(|(a, b)| a + t * (b - a)).collect()
                        } else {
                            p
                        }
                    }
                    Some(r) => match kind % 4 {
                        0 => {
                            let d = random_tangent(&mut rng, &normals, &free);
                            bar.iter().zip(&d).map(|(a, b)| a + r * b).collect()
                        }
                        2 => radial(&bar, &dirichlet(&mut rng, len, true), r),
                        3 => {
                            let p = dirichlet(&mut rng, len, true);
                            let t = 10f64.powf(-3.0 * rng.random::<f64>());
                            let x: Vec<f64> =
                                candidate.iter().zip(&p).map(|(a, b)| a + t * (b - a)).collect();
                            radial(&bar, &x, r)
                        }
                        _ => {
                            let h = &arcs[rng.random_range(0..arcs.len())];
                            let t = 10f64.powf(-3.0 * rng.random::<f64>());
                            let x: Vec<f64> = (0..len)
                                .map(|j| bar[j] + (1.0 - t) * (candidate[j] - bar[j]) + t * h[j])
                                .collect();
                            radial(&bar, &x, r)
                        }
                    },
                };
                let feasible = x.iter().all(|&v| v >= 0.0)
                    && min_dist.as_ref().is_none_or(|m| m.slack(&x) >= -1e-12);
                if feasible {
                    return Ok((Some(lambda(&x)? - candidate_value), attempt));
                }
            }
            Ok((None, MAX_ATTEMPTS))
        })
        .collect();

    let mut report = GlobalProbeReport {
        construction,
        constraints,
        kappa,
        n,
        epsilon,
        samples: 0,
        violations: 0,
        min_margin: f64::INFINITY,
        candidate_value,
        rejected: 0,
        exhausted: 0,
        seed,
    };
    for r in results {
        let (margin, rejected) = r?;
        report.rejected += rejected;
        match margin {
            Some(m) => {
                report.samples += 1;
                report.min_margin = report.min_margin.min(m);
                if m < -tol {
                    report.violations += 1;
                }
            }
            None => report.exhausted += 1,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_of_uniform_and_first_sec() {
        for kappa in 2..=6usize {
            let xi = xi_transform(uniform_fraction(kappa).unwrap().q()).unwrap();
            let expected = ((1u64 << (kappa - 1)) - 1) as f64 / ((1u64 << kappa) - 1) as f64;
            assert!(xi.iter().all(|&x| (x - expected).abs() < 1e-14));
            let xi = xi_transform(subspace_exclusion(kappa, kappa - 1).unwrap().q()).unwrap();
            assert_eq!(xi.iter().filter(|&&x| x.abs() < 1e-14).count(), 1);
            assert_eq!(xi.iter().filter(|&&x| (x - 0.5).abs() < 1e-14).count(), xi.len() - 1);
        }
    }

    #[test]
    fn derivative_domains() {
        let q = uniform_fraction(2).unwrap().into_vec();
        assert!(matches!(gradient_equivocation(&q, 3, 0.0), Err(Error::Domain(_))));
        assert!(matches!(zero_column_derivative(&q, 3, 0.5), Err(Error::Domain(_))));
        let all_zero = vec![1.0, 0.0, 0.0, 0.0];
        assert!(matches!(chi2_zero_column_derivative(&all_zero, 3, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_column_example_is_negative() {
        let q = [0.5, 0.5, 0.0, 0.0];
        let z = zero_column_derivative(&q, 4, 0.3).unwrap();
        assert!(z.value < 0.0);
        assert!((z.value - z.gradient_form).abs() < 1e-12);
        let c = chi2_zero_column_derivative(&q, 4, 0.3).unwrap();
        assert!(c.value < 0.0);
    }

    #[test]
    fn constraint_check_rejects_off_sphere() {
        let q = uniform_fraction(3).unwrap().into_vec();
        assert!(ConstraintSet::reduced_simplex().check(&q).is_ok());
        assert!(ConstraintSet::sphere(2).check(&q).is_err());
        let sec = subspace_exclusion(3, 2).unwrap().into_vec();
        assert!(ConstraintSet::sphere(2).check(&sec).is_ok());
    }
}
