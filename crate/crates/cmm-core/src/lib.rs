//! Contextual measurement models.
//!
//! A contextual probability space pairs a set of pre-measurement contexts
//! with a set of observables and, for each pair, an outcome distribution.
//! Adding context-update maps (instruments) turns the space into a
//! measurement model in which conditioning, interference, order effects,
//! replicability, correlations, and entanglement are all expressible without
//! committing to a particular state-space representation.
//!
//! This crate provides:
//!
//! * [`linalg`]: a dense complex-matrix kernel with a Jacobi Hermitian
//!   eigensolver and eigenvalue clustering;
//! * [`contextual`]: the backend-agnostic calculus: conditional
//!   probabilities, the total-probability interference term, order-effect and
//!   replicability detectors, Bayes inference, correlations, CHSH, dependence
//!   and concurrence measures, and a feature report;
//! * [`classical`]: finite Kolmogorov probability spaces as a backend,
//!   including the null-set quotient and uniqueness checks;
//! * [`quantum`]: density-matrix backends with projective (Lüders) updates
//!   and general quantum instruments, POVM derivation, complete-positivity
//!   checks, a CHSH maximizer, and an order-effect/response-replicability
//!   witness search;
//! * [`lsr`]: linear-space representations: measure-valued states with
//!   positive instruments, and the embedding of contexts into the
//!   function space over (observable, outcome) pairs;
//! * [`sampler`]: a reproducible counter-based generator and frequency
//!   estimation for single and sequential measurement runs.

pub mod classical;
pub mod contextual;
pub mod error;
pub mod linalg;
pub mod lsr;
pub mod quantum;
pub mod sampler;
pub mod tolerance;

pub use contextual::report::DiagnosticsReport;
pub use contextual::{ContextualModel, OutcomeValue};
pub use error::{CmmError, Result};
pub use linalg::{CMatrix, SpectralDecomposition, C64};
pub use tolerance::Tolerances;
