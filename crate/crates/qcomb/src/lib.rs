//! Choi-operator calculus for quantum networks.
//!
//! Channels, states, POVMs and multi-step strategies are all represented as
//! positive operators over labeled tensor factors ("labeled operators") and
//! composed with a single primitive, the link product. On top of that sit
//! quantum combs (operators of multi-step networks with memory), their
//! realization as sequences of isometries, testers (measurements on networks),
//! minimum-error discrimination, and multiple-time states.
//!
//! # Module map
//!
//! - [`spaces`]: labeled Hilbert-space factors and ordered tuples of them.
//! - [`operators`]: dense complex operators over space tuples; tensor algebra,
//!   partial trace/transpose, vectorization, the Choi isomorphism, Kraus
//!   decomposition.
//! - [`link`]: the link product and saturated chains of it.
//! - [`combs`]: tooth structure, the deterministic normalization hierarchy,
//!   probabilistic-comb feasibility, tensor products of combs.
//! - [`realization`]: minimal Stinespring isometries, memory-channel
//!   realization of combs and instruments, network complexity.
//! - [`network`]: DAGs of combs, causal validation, compilation to one comb.
//! - [`testers`]: generalized instruments and testers, the generalized Born
//!   rule, realization split, informationally complete testers.
//! - [`discrimination`]: Helstrom measurement, operational comb distance by
//!   seesaw over tester normalizations, cb-norm distance at one step.
//! - [`multitime`]: multiple-time states and measurements.
//! - [`io`]: JSON (de)serialization for all artifact types.

pub mod spaces;
pub mod linalg;
pub mod operators;
pub mod link;
pub mod combs;
pub mod realization;
pub mod network;
pub mod testers;
pub mod discrimination;
pub mod multitime;
pub mod io;

mod error;
pub use error::QcombError;

/// Default absolute tolerance for Hermiticity checks (max-entry norm).
pub const TOL_HERMITIAN: f64 = 1e-9;
/// Default relative floor for the minimum eigenvalue in PSD checks,
/// scaled by the max-entry norm of the operator.
pub const TOL_PSD: f64 = 1e-9;
/// Relative eigenvalue cutoff (w.r.t. the largest eigenvalue) below which
/// spectral components are treated as numerical rank deficiency.
pub const TOL_RANK: f64 = 1e-10;
/// Relative singular-value cutoff for Moore-Penrose pseudo-inverses.
pub const TOL_PINV: f64 = 1e-10;
