//! Backend-agnostic contextual measurement calculus.
//!
//! A backend exposes contexts, observables with finite outcome ranges, and
//! instruments (context-update maps) through the [`ContextualModel`] trait;
//! everything in [`ops`] and [`report`] is written against that trait alone,
//! so the classical, projective, instrument, and measure backends all share
//! one implementation of the diagnostics.

pub mod ops;
pub mod report;

use crate::error::{CmmError, Result};
use crate::tolerance::Tolerances;
use serde::{Deserialize, Serialize};

/// One point of an observable's outcome range: a display label plus an
/// optional numeric value for operations that need arithmetic (averages,
/// correlations, CHSH).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeValue {
    pub label: String,
    pub value: Option<f64>,
}

impl OutcomeValue {
    pub fn numeric(value: f64) -> OutcomeValue {
        OutcomeValue {
            label: format_numeric(value),
            value: Some(value),
        }
    }

    pub fn labelled(label: impl Into<String>) -> OutcomeValue {
        OutcomeValue {
            label: label.into(),
            value: None,
        }
    }

    pub fn with_label(label: impl Into<String>, value: f64) -> OutcomeValue {
        OutcomeValue {
            label: label.into(),
            value: Some(value),
        }
    }
}

fn format_numeric(v: f64) -> String {
    // Snap away eigensolver round-off so labels read "1", not
    // "0.9999999999999998"; values this close are clustered anyway.
    let snapped = if v.abs() < 1e6 {
        (v * 1e12).round() / 1e12
    } else {
        v
    };
    if snapped == snapped.round() && snapped.abs() < 1e15 {
        format!("{}", snapped as i64)
    } else {
        format!("{snapped}")
    }
}

/// A contextual measurement model: contexts, observables with finite outcome
/// ranges, and instruments that update contexts per outcome.
///
/// Implementations guarantee that every distribution returned by
/// [`prob_dist`](ContextualModel::prob_dist) is nonnegative and sums to one
/// within `tolerances().dist_sum`, and that
/// [`update`](ContextualModel::update) is defined exactly when the outcome
/// probability exceeds `tolerances().eps_cond`.
pub trait ContextualModel {
    /// Opaque pre-measurement context handle.
    type Context: Clone;

    /// Names of the observables the model exposes.
    fn observables(&self) -> Vec<String>;

    /// Outcome range of an observable, in declared order.
    fn outcomes(&self, observable: &str) -> Result<Vec<OutcomeValue>>;

    /// Instruments that measure the given observable.
    fn instruments_for(&self, observable: &str) -> Result<Vec<String>>;

    /// The observable a given instrument measures.
    fn instrument_observable(&self, instrument: &str) -> Result<String>;

    /// Outcome distribution of `observable` in `context`.
    fn prob_dist(&self, context: &Self::Context, observable: &str) -> Result<Vec<f64>>;

    /// Context update for the instrument's `outcome` (index into the
    /// observable's outcome range). Errors with
    /// [`CmmError::Conditioning`] when the outcome probability is at or
    /// below the conditioning threshold.
    fn update(
        &self,
        context: &Self::Context,
        instrument: &str,
        outcome: usize,
    ) -> Result<Self::Context>;

    /// Names of the model's registered contexts.
    fn context_names(&self) -> Vec<String>;

    /// Resolve a registered context by name.
    fn context(&self, name: &str) -> Result<Self::Context>;

    /// Short human-readable description of a context, used in witness
    /// records and error messages.
    fn describe_context(&self, context: &Self::Context) -> String;

    /// The tolerance record all numeric comparisons route through.
    fn tolerances(&self) -> &Tolerances;

    /// Default context sample for the feature report. Backends with a
    /// continuum of contexts draw a seeded sample; finite backends enumerate.
    fn default_context_sample(&self, seed: u64) -> Vec<(String, Self::Context)> {
        let _ = seed;
        self.context_names()
            .into_iter()
            .filter_map(|n| self.context(&n).ok().map(|c| (n, c)))
            .collect()
    }

    /// Model-level CHSH maximum, when the backend has a dedicated maximizer.
    /// `None` means the feature report falls back to the best value over its
    /// sample.
    fn chsh_maximum(&self, seed: u64, restarts: usize) -> Option<ops::ChshSummary> {
        let _ = (seed, restarts);
        None
    }
}

/// Numeric outcome values of an observable, or a domain error naming the
/// first non-numeric one.
pub(crate) fn numeric_outcomes<M: ContextualModel + ?Sized>(
    model: &M,
    observable: &str,
) -> Result<Vec<f64>> {
    model
        .outcomes(observable)?
        .iter()
        .map(|o| {
            o.value.ok_or_else(|| {
                CmmError::Domain(format!(
                    "observable {observable} has non-numeric outcome `{}`",
                    o.label
                ))
            })
        })
        .collect()
}
