//! Feature report: the per-model checklist of probabilistic constraints
//! (total-probability violation, order effect, replicability, response
//! replicability, their combination, and Bell-bound violation), each row
//! carrying a witness that can be re-checked through the corresponding
//! operation.

use super::ops::{self, ChshSummary};
use super::ContextualModel;
use crate::error::Result;
use serde::{Deserialize, Serialize};

/// Witness for a total-probability violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FtpWitness {
    pub context: String,
    pub instrument_a: String,
    pub observable_b: String,
    pub outcome_b: usize,
    pub delta: f64,
}

/// Witness for an order effect (or a replicability / response-replicability
/// failure, which reuses the same shape with `outcome_*` set to the failing
/// indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub context: String,
    pub instrument_a: String,
    pub instrument_b: String,
    pub outcome_a: usize,
    pub outcome_b: usize,
    pub discrepancy: f64,
}

/// Witness for a replicability failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicabilityWitness {
    pub context: String,
    pub instrument: String,
    pub residual: f64,
}

/// The checklist of probabilistic constraints evaluated over a sample of
/// contexts and observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Some sampled configuration violates the total-probability formula.
    pub ftp_violated: bool,
    pub max_interference: f64,
    pub ftp_witness: Option<FtpWitness>,

    /// Some sampled pair of instruments shows the order effect.
    pub order_effect: bool,
    pub oe_witness: Option<PairWitness>,

    /// Every sampled instrument is replicable in every sampled context.
    pub replicability: bool,
    pub replicability_failure: Option<ReplicabilityWitness>,

    /// Every sampled pair passes response replicability.
    pub rre: bool,
    pub rre_failure: Option<PairWitness>,

    /// Some sampled pair shows the order effect while passing response
    /// replicability in the same context.
    pub oe_and_rre: bool,
    pub oe_rre_witness: Option<PairWitness>,

    /// Best CHSH value found (backend maximizer when available, otherwise
    /// the best over the sample).
    pub chsh_max: f64,
    pub bell_violated: bool,
    pub chsh_configuration: String,
    /// Full-precision witness configuration from the backend maximizer.
    pub chsh_witness: Option<ops::ChshWitnessConfig>,
}

impl DiagnosticsReport {
    /// Compact "yes/no" table, one line per checklist row.
    pub fn table(&self) -> String {
        let yn = |b: bool| if b { "yes" } else { "no" };
        format!(
            "violation of FTP: {} (max |delta| = {:.3e})\n\
             order effect: {}\n\
             replicability: {}\n\
             RRE: {}\n\
             OE+RRE: {}\n\
             violation of Bell inequality: {} (CHSH max = {:.6})",
            yn(self.ftp_violated),
            self.max_interference,
            yn(self.order_effect),
            yn(self.replicability),
            yn(self.rre),
            yn(self.oe_and_rre),
            yn(self.bell_violated),
            self.chsh_max,
        )
    }
}

/// Evaluate the checklist over the given labelled contexts and observables.
///
/// For each observable the model's registered instruments are used. The
/// CHSH row delegates to the backend maximizer when one exists; otherwise it
/// takes the best compatible quadruple over the sample.
pub fn feature_report<M: ContextualModel>(
    model: &M,
    contexts: &[(String, M::Context)],
    observables: &[String],
    seed: u64,
) -> Result<DiagnosticsReport> {
    if contexts.is_empty() || observables.is_empty() {
        return Err(crate::error::CmmError::Precondition(
            "feature report needs a nonempty context and observable sample".into(),
        ));
    }
    let tol = *model.tolerances();

    let mut instruments: Vec<String> = Vec::new();
    for obs in observables {
        for inst in model.instruments_for(obs)? {
            if !instruments.contains(&inst) {
                instruments.push(inst);
            }
        }
    }

    let mut report = DiagnosticsReport {
        ftp_violated: false,
        max_interference: 0.0,
        ftp_witness: None,
        order_effect: false,
        oe_witness: None,
        replicability: true,
        replicability_failure: None,
        rre: true,
        rre_failure: None,
        oe_and_rre: false,
        oe_rre_witness: None,
        chsh_max: 0.0,
        bell_violated: false,
        chsh_configuration: String::new(),
        chsh_witness: None,
    };

    for (label, ctx) in contexts {
        // Replicability of each instrument.
        for inst in &instruments {
            let residual = ops::replicability_residual(model, ctx, inst)?;
            if residual > tol.eps_rep && report.replicability {
                report.replicability = false;
                report.replicability_failure = Some(ReplicabilityWitness {
                    context: label.clone(),
                    instrument: inst.clone(),
                    residual,
                });
            }
        }

        // Pairwise rows.
        for ia in &instruments {
            let obs_a = model.instrument_observable(ia)?;
            for ib in &instruments {
                let obs_b = model.instrument_observable(ib)?;
                if obs_a == obs_b {
                    continue;
                }

                // Total-probability interference, conditioning through A.
                let nb = model.outcomes(&obs_b)?.len();
                for y in 0..nb {
                    let datum = ops::ftp_interference(model, ctx, ia, &obs_b, y)?;
                    if datum.delta.abs() > report.max_interference {
                        report.max_interference = datum.delta.abs();
                        report.ftp_witness = Some(FtpWitness {
                            context: label.clone(),
                            instrument_a: ia.clone(),
                            observable_b: obs_b.clone(),
                            outcome_b: y,
                            delta: datum.delta,
                        });
                    }
                }

                // Order effect / RRE / their combination (unordered pairs).
                if ia < ib {
                    let oe = ops::order_effect(model, ctx, ia, ib)?;
                    if oe.present && !report.order_effect {
                        report.order_effect = true;
                        report.oe_witness = Some(PairWitness {
                            context: label.clone(),
                            instrument_a: ia.clone(),
                            instrument_b: ib.clone(),
                            outcome_a: oe.witness.0,
                            outcome_b: oe.witness.1,
                            discrepancy: oe.max_discrepancy,
                        });
                    }
                    let rre_residual = ops::rre_residual(model, ctx, ia, ib)?;
                    if rre_residual > tol.eps_rre && report.rre {
                        report.rre = false;
                        report.rre_failure = Some(PairWitness {
                            context: label.clone(),
                            instrument_a: ia.clone(),
                            instrument_b: ib.clone(),
                            outcome_a: 0,
                            outcome_b: 0,
                            discrepancy: rre_residual,
                        });
                    }
                    if oe.present && rre_residual <= tol.eps_rre && !report.oe_and_rre {
                        report.oe_and_rre = true;
                        report.oe_rre_witness = Some(PairWitness {
                            context: label.clone(),
                            instrument_a: ia.clone(),
                            instrument_b: ib.clone(),
                            outcome_a: oe.witness.0,
                            outcome_b: oe.witness.1,
                            discrepancy: oe.max_discrepancy,
                        });
                    }
                }
            }
        }
    }
    report.ftp_violated = report.max_interference > tol.eps_oe;

    let chsh = match model.chsh_maximum(seed, 16) {
        Some(summary) => summary,
        None => sample_chsh(model, contexts, &instruments)?,
    };
    report.chsh_max = chsh.value;
    report.chsh_configuration = chsh.configuration;
    report.chsh_witness = chsh.witness;
    report.bell_violated = report.chsh_max > 2.0 + tol.bell_margin;

    Ok(report)
}

/// Best CHSH value over quadruples drawn from the sampled instruments,
/// skipping incompatible or non-numeric configurations.
fn sample_chsh<M: ContextualModel>(
    model: &M,
    contexts: &[(String, M::Context)],
    instruments: &[String],
) -> Result<ChshSummary> {
    let mut best = ChshSummary {
        value: 0.0,
        configuration: "no admissible configuration in sample".into(),
        witness: None,
    };
    let n = instruments.len();
    for (label, ctx) in contexts {
        for i1 in 0..n {
            for i2 in (i1 + 1)..n {
                for j1 in 0..n {
                    for j2 in (j1 + 1)..n {
                        if i1 == j1 || i1 == j2 || i2 == j1 || i2 == j2 {
                            continue;
                        }
                        let result = ops::chsh_value(
                            model,
                            ctx,
                            [&instruments[i1], &instruments[i2]],
                            [&instruments[j1], &instruments[j2]],
                            false,
                        );
                        if let Ok(v) = result {
                            if v.value > best.value {
                                best.value = v.value;
                                best.configuration = format!(
                                    "context {label}: A=({}, {}), B=({}, {})",
                                    instruments[i1],
                                    instruments[i2],
                                    instruments[j1],
                                    instruments[j2]
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(best)
}
