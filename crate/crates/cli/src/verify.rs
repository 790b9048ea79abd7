//! `ewsd verify`: oracle-equivalence and identity suites.

use ewsd::codes::from_generator;
use ewsd::gf2::GeneratorMatrix;
use ewsd::lattice::{enumerate_subspaces, gaussian_binomial_f64};
use ewsd::oracle::{chi2_oracle, equivocation_loss_oracle, ChannelParams, MAX_ORACLE_N};
use ewsd::sdmetrics::constants::{
    eta_moment, eta_partial_sum, eta_prime, eta_row_sum, eta_weighted_sum, gamma_closed, gamma_sum,
    k_constant_f64,
};
use ewsd::sdmetrics::{chi2_sd, equivocation_loss_with_constants, psi_table, HyperplanePath};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::input::emit;
use crate::{CmdResult, Failure};

/// Largest κ with a full subspace lattice.
const MAX_LATTICE_KAPPA: usize = 8;
/// Largest κ for the ψ recursion, which is quadratic in the lattice size.
const MAX_PSI_KAPPA: usize = 5;
const EQUIVALENCE_TOL: f64 = 1e-9;
const PSI_FLOOR: f64 = -1e-12;

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    #[arg(long, default_value_t = 4)]
    kappa_max: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// Random codes per sampled suite.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Add 1 to K_3 before running, to check that the suites notice.
    #[arg(long, hide = true)]
    corrupt_k3: bool,
}

#[derive(Debug, Default, Serialize)]
struct Suite {
    name: &'static str,
    checks: usize,
    failures: usize,
    max_error: f64,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self { name, ..Self::default() }
    }

    /// Records `|got − want|` against `tol`.
    fn compare(&mut self, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        self.checks += 1;
        self.max_error = self.max_error.max(if err.is_nan() { f64::INFINITY } else { err });
        if err.is_nan() || err > tol {
            self.failures += 1;
        }
    }

    fn require(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            self.max_error = self.max_error.max(1.0);
        }
    }
}

struct Sample {
    g: GeneratorMatrix,
    params: ChannelParams,
}

fn sample(args: &Args, index: usize) -> Result<Sample, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(index as u64);
    let kappa = rng.random_range(1..=args.kappa_max);
    let n = rng.random_range(1..=args.n_max);
    let cols = (0..n).map(|_| rng.random_range(0..1u32 << kappa)).collect();
    let g = GeneratorMatrix::new(kappa, cols)?;
    // Alternate the two channel models; ε runs over the grid 0.1..=0.9.
    let params = if index.is_multiple_of(2) {
        ChannelParams::epsilon(n, rng.random_range(1..=9) as f64 / 10.0)?
    } else {
        ChannelParams::mu(n, rng.random_range(0..=n))?
    };
    Ok(Sample { g, params })
}

fn run_suites(args: &Args, k: &[f64]) -> Result<Vec<Suite>, Failure> {
    let mut equivocation = Suite::new("equivocation-equivalence");
    let mut chi2 = Suite::new("chi2-equivalence");
    let mut psi = Suite::new("psi-nonnegativity");
    for i in 0..args.samples {
        let s = sample(args, i)?;
        let q = from_generator(&s.g)?;
        let oracle = equivocation_loss_oracle(&s.g, s.params)?.value;
        equivocation.compare(equivocation_loss_with_constants(q.q(), s.params, k)?, oracle, EQUIVALENCE_TOL);
        let oracle = chi2_oracle(&s.g, s.params)?.value;
        for path in [HyperplanePath::Transform, HyperplanePath::Direct] {
            chi2.compare(chi2_sd(q.q(), s.params, path)?.value, oracle, EQUIVALENCE_TOL * oracle.abs().max(1.0));
        }
        if q.kappa() <= MAX_PSI_KAPPA {
            let min = psi_table(q.q(), s.params)?.into_iter().flatten().fold(f64::INFINITY, f64::min);
            psi.require(min >= PSI_FLOOR);
            psi.max_error = psi.max_error.max(-min.min(0.0));
        }
    }

    let mut identities = Suite::new("constant-identities");
    let top = args.kappa_max;
    for a in 0..=top {
        identities.require(eta_row_sum(a).is_zero() == (a != 0));
        if a >= 1 {
            // Σ_j j η′(a, j) must reproduce the K table the formulas use.
            let moment = eta_moment(a).to_f64().unwrap_or(f64::NAN);
            identities.compare(moment, k[a - 1], 0.0);
        }
        for b in 1..=a {
            identities.require(eta_partial_sum(a, b) == (eta_prime(a - 1, b - 1) << (a - b)));
        }
        for b in 0..=a {
            identities.require(eta_weighted_sum(a, b).is_zero() == (a != b));
        }
        for d in 0..=a {
            identities.require(gamma_sum(a, d) == gamma_closed(a, d));
        }
    }

    let mut lattice = Suite::new("lattice-counts");
    for kappa in 1..=top {
        for d in 0..=kappa {
            let count = enumerate_subspaces(kappa, d)?.len();
            lattice.compare(count as f64, gaussian_binomial_f64(kappa as i64, d as i64), 0.0);
        }
    }
    Ok(vec![equivocation, chi2, psi, identities, lattice])
}

pub fn run(args: Args) -> CmdResult {
    if args.kappa_max == 0 || args.n_max == 0 || args.samples == 0 {
        return Err(Failure::usage("--kappa-max, --n-max and --samples must be positive"));
    }
    if args.kappa_max > MAX_LATTICE_KAPPA {
        return Err(Failure::resource(format!("--kappa-max is capped at {MAX_LATTICE_KAPPA}")));
    }
    if args.n_max > MAX_ORACLE_N {
        return Err(Failure::resource(format!("--n-max is capped at {MAX_ORACLE_N}")));
    }
    let mut k: Vec<f64> = (1..=args.kappa_max).map(k_constant_f64).collect();
    if args.corrupt_k3 {
        match k.get_mut(2) {
            Some(k3) => *k3 += 1.0,
            None => return Err(Failure::usage("--corrupt-k3 needs --kappa-max >= 3")),
        }
    }
    let suites = run_suites(&args, &k)?;
    let passed = suites.iter().all(|s| s.failures == 0);
    emit(&args, json!({ "suites": suites, "passed": passed }));
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = suites.iter().filter(|s| s.failures > 0).map(|s| s.name).collect();
        Err(Failure::failed(format!("verification failed: {}", failed.join(", "))))
    }
}
