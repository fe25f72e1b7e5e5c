//! Central tolerance record.
//!
//! Every numeric comparison in the crate routes through one of these fields,
//! so a single override point controls what counts as "zero", "one", or
//! "equal" in each layer of the model.

use serde::{Deserialize, Serialize};

/// Numeric thresholds used across the crate.
///
/// The defaults separate structural zeros from floating-point noise: the
/// conditioning threshold `eps_cond` sits near machine precision, while the
/// effect-level thresholds (`eps_oe`, `eps_dep`, `eps_epr`) sit three orders
/// of magnitude above accumulated round-off for the matrix sizes in scope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-norm Hermiticity residual accepted for eigendecomposition input.
    pub hermitian: f64,
    /// Eigenvalue clustering width, relative to the spectral radius.
    pub cluster_rel: f64,
    /// Lower bound slack for positive-semidefiniteness tests.
    pub psd: f64,
    /// Allowed deviation of a probability distribution's sum from 1.
    pub dist_sum: f64,
    /// Hermiticity / trace residual accepted for density matrices.
    pub state: f64,
    /// Allowed deviation of classical weights (and measure states) from sum 1.
    pub weights_sum: f64,
    /// Conditioning-domain threshold: updates are defined when the outcome
    /// probability exceeds this.
    pub eps_cond: f64,
    /// Order-effect detection threshold.
    pub eps_oe: f64,
    /// Outcome-dependence detection threshold.
    pub eps_dep: f64,
    /// Perfect-correlation threshold for EPR checks.
    pub eps_epr: f64,
    /// Replicability residual bound.
    pub eps_rep: f64,
    /// Response-replicability residual bound.
    pub eps_rre: f64,
    /// POVM / instrument normalization residual bound.
    pub povm: f64,
    /// Slack on |lambda| <= 1 for the trigonometric regime.
    pub lambda_trig: f64,
    /// CHSH values above 2 + this count as a Bell violation.
    pub bell_margin: f64,
    /// Coordinate-wise threshold under which two embedded contexts collide.
    pub separation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            cluster_rel: 1e-8,
            psd: 1e-9,
            dist_sum: 1e-10,
            state: 1e-10,
            weights_sum: 1e-12,
            eps_cond: 1e-12,
            eps_oe: 1e-9,
            eps_dep: 1e-9,
            eps_epr: 1e-9,
            eps_rep: 1e-9,
            eps_rre: 1e-9,
            povm: 1e-9,
            lambda_trig: 1e-9,
            bell_margin: 1e-9,
            separation: 1e-12,
        }
    }
}

impl Tolerances {
    /// Override a field by name. Unknown names are rejected so CLI typos
    /// surface instead of silently keeping the default.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        match name {
            "hermitian" => self.hermitian = value,
            "cluster_rel" => self.cluster_rel = value,
            "psd" => self.psd = value,
            "dist_sum" => self.dist_sum = value,
            "state" => self.state = value,
            "weights_sum" => self.weights_sum = value,
            "eps_cond" => self.eps_cond = value,
            "eps_oe" => self.eps_oe = value,
            "eps_dep" => self.eps_dep = value,
            "eps_epr" => self.eps_epr = value,
            "eps_rep" => self.eps_rep = value,
            "eps_rre" => self.eps_rre = value,
            "povm" => self.povm = value,
            "lambda_trig" => self.lambda_trig = value,
            "bell_margin" => self.bell_margin = value,
            "separation" => self.separation = value,
            other => return Err(format!("unknown tolerance `{other}`")),
        }
        Ok(())
    }
}
