//! Error type shared by all backends.

use thiserror::Error;

/// Errors produced by model construction, validation, and the diagnostics
/// calculus.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CmmError {
    /// Matrix or table dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input is outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A named context, observable, instrument, or outcome does not exist.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// Conditioning was requested on an outcome of (numerically) zero
    /// probability, where the context update is undefined.
    #[error("conditioning on null outcome: context {context}, observable {observable}, outcome {outcome}")]
    Conditioning {
        context: String,
        observable: String,
        outcome: String,
    },

    /// A stated precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Malformed caller-supplied data.
    #[error("invalid input: {0}")]
    Input(String),

    /// A structural invariant of a model object is violated.
    #[error("invariant violated: {name} (residual {residual:.3e})")]
    Invariant { name: String, residual: f64 },
}

impl CmmError {
    pub fn invariant(name: impl Into<String>, residual: f64) -> Self {
        CmmError::Invariant {
            name: name.into(),
            residual,
        }
    }
}

pub type Result<T> = std::result::Result<T, CmmError>;
