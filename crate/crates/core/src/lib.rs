//! Secrecy metrics for coset codes over the binary erasure wiretap channel.
//!
//! A coset code is described either by its `κ × n` generator matrix or, up to
//! column order, by the vector `q` of column fractions. The crate evaluates the
//! eavesdropper's equivocation loss, the χ² divergence and the total variation
//! distance in three independent ways:
//!
//! * [`oracle`] enumerates every erasure pattern and computes ranks directly.
//! * [`sdmetrics`] sums closed-form terms over the subspace lattice of `F₂^κ`.
//! * [`mcsim`] simulates the channel and reports a confidence interval.
//!
//! [`optprobe`] checks the optimality properties of the uniform and subspace
//! exclusion constructions numerically.

pub mod codes;
pub mod error;
pub mod gf2;
pub mod lattice;
pub mod mcsim;
pub mod optprobe;
pub mod oracle;
pub mod sdmetrics;
pub(crate) mod sum;

pub use error::{Error, Result};
