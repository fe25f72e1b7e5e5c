//! Quantum contextual models over density-matrix contexts.
//!
//! A model of the projective flavor registers Hermitian observables, each
//! carrying its Lüders instrument. The instrument flavor additionally (or
//! instead) registers arbitrary instruments; each instrument induces an
//! observable through its POVM, so the generic calculus sees one uniform
//! effect-based interface.

use super::instrument::{povm_from_instrument, Instrument};
use super::search::{chsh_maximize, search_space_summary};
use super::{DensityMatrix, HermitianObservable};
use crate::contextual::ops::ChshSummary;
use crate::contextual::{ContextualModel, OutcomeValue};
use crate::error::{CmmError, Result};
use crate::linalg::CMatrix;
use crate::sampler::CounterRng;
use crate::tolerance::Tolerances;
use std::collections::BTreeMap;

/// Effect-based view of an observable: outcome values plus one effect per
/// outcome (projectors for Hermitian observables, POVM effects for
/// instrument-induced ones).
#[derive(Debug, Clone)]
struct EffectObservable {
    outcomes: Vec<OutcomeValue>,
    effects: Vec<CMatrix>,
}

/// Quantum contextual model: named states (contexts), observables, and
/// instruments over a fixed Hilbert-space dimension.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    dim: usize,
    observables: BTreeMap<String, EffectObservable>,
    hermitians: BTreeMap<String, HermitianObservable>,
    instruments: BTreeMap<String, Instrument>,
    instrument_obs: BTreeMap<String, String>,
    states: BTreeMap<String, DensityMatrix>,
    tolerances: Tolerances,
}

impl QuantumModel {
    pub fn new(dim: usize, tolerances: Tolerances) -> QuantumModel {
        QuantumModel {
            dim,
            observables: BTreeMap::new(),
            hermitians: BTreeMap::new(),
            instruments: BTreeMap::new(),
            instrument_obs: BTreeMap::new(),
            states: BTreeMap::new(),
            tolerances,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Register a named state (context).
    pub fn add_state(&mut self, name: impl Into<String>, state: DensityMatrix) -> Result<()> {
        if state.dim() != self.dim {
            return Err(CmmError::Shape(format!(
                "state has dimension {}, model has {}",
                state.dim(),
                self.dim
            )));
        }
        self.states.insert(name.into(), state);
        Ok(())
    }

    /// Register a Hermitian observable together with its Lüders instrument
    /// (same name).
    pub fn add_observable(&mut self, observable: HermitianObservable) -> Result<()> {
        if observable.dim() != self.dim {
            return Err(CmmError::Shape(format!(
                "observable {} has dimension {}, model has {}",
                observable.name(),
                observable.dim(),
                self.dim
            )));
        }
        let name = observable.name().to_string();
        let entry = EffectObservable {
            outcomes: observable
                .outcomes()
                .iter()
                .map(|&x| OutcomeValue::numeric(x))
                .collect(),
            effects: observable.spectral().projectors().to_vec(),
        };
        let luders = Instrument::luders(name.clone(), &observable, &self.tolerances)?;
        self.observables.insert(name.clone(), entry);
        self.hermitians.insert(name.clone(), observable);
        self.instruments.insert(name.clone(), luders);
        self.instrument_obs.insert(name.clone(), name);
        Ok(())
    }

    /// Register an instrument. When `observable` is given the instrument is
    /// attached to that (existing) observable; otherwise the instrument's
    /// POVM induces an observable under the instrument's own name.
    pub fn add_instrument(
        &mut self,
        instrument: Instrument,
        observable: Option<&str>,
    ) -> Result<()> {
        if instrument.dim() != self.dim {
            return Err(CmmError::Shape(format!(
                "instrument {} has dimension {}, model has {}",
                instrument.name(),
                instrument.dim(),
                self.dim
            )));
        }
        let name = instrument.name().to_string();
        let povm = povm_from_instrument(&instrument, &self.tolerances)?;
        match observable {
            Some(obs) => {
                let entry = self
                    .observables
                    .get(obs)
                    .ok_or_else(|| CmmError::Lookup(format!("unknown observable `{obs}`")))?;
                if entry.outcomes.len() != instrument.outcomes().len() {
                    return Err(CmmError::Shape(format!(
                        "instrument {name} has {} outcomes, observable {obs} has {}",
                        instrument.outcomes().len(),
                        entry.outcomes.len()
                    )));
                }
                // The instrument must reproduce the observable's statistics.
                for (x, effect) in entry.effects.iter().enumerate() {
                    let residual = effect.sub(povm.effect(x))?.max_norm();
                    if residual > self.tolerances.povm {
                        return Err(CmmError::invariant(
                            format!("instrument {name} induces the POVM of {obs}"),
                            residual,
                        ));
                    }
                }
                self.instrument_obs.insert(name.clone(), obs.to_string());
            }
            None => {
                let entry = EffectObservable {
                    outcomes: instrument.outcomes().to_vec(),
                    effects: povm.effects().to_vec(),
                };
                self.observables.insert(name.clone(), entry);
                self.instrument_obs.insert(name.clone(), name.clone());
            }
        }
        self.instruments.insert(name, instrument);
        Ok(())
    }

    pub fn state(&self, name: &str) -> Result<&DensityMatrix> {
        self.states
            .get(name)
            .ok_or_else(|| CmmError::Lookup(format!("unknown state `{name}`")))
    }

    pub fn states(&self) -> impl Iterator<Item = (&String, &DensityMatrix)> {
        self.states.iter()
    }

    pub fn hermitian(&self, name: &str) -> Result<&HermitianObservable> {
        self.hermitians
            .get(name)
            .ok_or_else(|| CmmError::Lookup(format!("no Hermitian observable `{name}`")))
    }

    pub fn instrument(&self, name: &str) -> Result<&Instrument> {
        self.instruments
            .get(name)
            .ok_or_else(|| CmmError::Lookup(format!("unknown instrument `{name}`")))
    }

    pub fn instrument_names(&self) -> Vec<String> {
        self.instruments.keys().cloned().collect()
    }

    fn observable_entry(&self, name: &str) -> Result<&EffectObservable> {
        self.observables
            .get(name)
            .ok_or_else(|| CmmError::Lookup(format!("unknown observable `{name}`")))
    }
}

impl ContextualModel for QuantumModel {
    type Context = DensityMatrix;

    fn observables(&self) -> Vec<String> {
        self.observables.keys().cloned().collect()
    }

    fn outcomes(&self, observable: &str) -> Result<Vec<OutcomeValue>> {
        Ok(self.observable_entry(observable)?.outcomes.clone())
    }

    fn instruments_for(&self, observable: &str) -> Result<Vec<String>> {
        self.observable_entry(observable)?;
        Ok(self
            .instrument_obs
            .iter()
            .filter(|(_, obs)| obs.as_str() == observable)
            .map(|(inst, _)| inst.clone())
            .collect())
    }

    fn instrument_observable(&self, instrument: &str) -> Result<String> {
        self.instrument_obs
            .get(instrument)
            .cloned()
            .ok_or_else(|| CmmError::Lookup(format!("unknown instrument `{instrument}`")))
    }

    fn prob_dist(&self, context: &DensityMatrix, observable: &str) -> Result<Vec<f64>> {
        let entry = self.observable_entry(observable)?;
        entry
            .effects
            .iter()
            .map(|e| Ok(e.mul(context.matrix())?.trace()?.re.clamp(0.0, 1.0)))
            .collect()
    }

    fn update(
        &self,
        context: &DensityMatrix,
        instrument: &str,
        outcome: usize,
    ) -> Result<DensityMatrix> {
        let inst = self.instrument(instrument)?;
        let out = inst.apply(outcome, context, &self.tolerances)?;
        out.updated.ok_or_else(|| CmmError::Conditioning {
            context: self.describe_context(context),
            observable: self.instrument_obs[instrument].clone(),
            outcome: inst
                .outcomes()
                .get(outcome)
                .map(|o| o.label.clone())
                .unwrap_or_else(|| outcome.to_string()),
        })
    }

    fn context_names(&self) -> Vec<String> {
        self.states.keys().cloned().collect()
    }

    fn context(&self, name: &str) -> Result<DensityMatrix> {
        self.state(name).cloned()
    }

    fn describe_context(&self, context: &DensityMatrix) -> String {
        for (name, state) in &self.states {
            if state.distance(context) < 1e-12 {
                return name.clone();
            }
        }
        format!("state(dim={})", context.dim())
    }

    fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// Twenty seeded random pure states plus the maximally mixed state.
    fn default_context_sample(&self, seed: u64) -> Vec<(String, DensityMatrix)> {
        let mut rng = CounterRng::new(seed);
        let mut sample: Vec<(String, DensityMatrix)> = (0..20)
            .map(|i| {
                (
                    format!("haar-{i}"),
                    super::random::pure_state(self.dim, &mut rng),
                )
            })
            .collect();
        sample.push((
            format!("mixed-I/{}", self.dim),
            DensityMatrix::maximally_mixed(self.dim),
        ));
        sample
    }

    /// Model-class CHSH maximum: the two-qubit search over commuting
    /// placements, independent of the registered fixtures.
    fn chsh_maximum(&self, seed: u64, restarts: usize) -> Option<ChshSummary> {
        let search = chsh_maximize(4, seed, restarts, false).ok()?;
        let witness = crate::contextual::ops::ChshWitnessConfig {
            state: search.witness.state.iter().map(|z| [z.re, z.im]).collect(),
            bloch: search.witness.bloch,
        };
        Some(ChshSummary {
            value: search.value,
            configuration: search_space_summary(&search),
            witness: Some(witness),
        })
    }
}

/// Interference data computed both ways for a projective pair: the
/// cross-term sum over distinct conditioning outcomes, and the generic
/// total-probability route.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumInterference {
    /// `sum_{a != a'} Tr(E_A(a) E_B(y) E_A(a') rho)`.
    pub delta_cross_terms: f64,
    /// The generic-route datum (delta, lambda, regime, theta).
    pub datum: crate::contextual::ops::InterferenceDatum,
}

/// Compute the interference term for `B = y` conditioned through the Lüders
/// instrument of A, by both routes.
///
/// The cross-term route expands `P(B=y)` over the spectral family of A; its
/// off-diagonal part is the interference term and must agree with the
/// generic definition to high accuracy.
pub fn quantum_interference(
    rho: &DensityMatrix,
    a: &HermitianObservable,
    b: &HermitianObservable,
    y: usize,
    tol: &Tolerances,
) -> Result<QuantumInterference> {
    if y >= b.outcomes().len() {
        return Err(CmmError::Lookup(format!(
            "outcome index {y} out of range for observable {}",
            b.name()
        )));
    }
    let eb = b.projector(y);
    let mut cross = 0.0;
    for alpha in 0..a.outcomes().len() {
        for alpha2 in 0..a.outcomes().len() {
            if alpha == alpha2 {
                continue;
            }
            let term = a
                .projector(alpha)
                .mul(eb)?
                .mul(a.projector(alpha2))?
                .mul(rho.matrix())?
                .trace()?;
            cross += term.re;
        }
    }

    let mut model = QuantumModel::new(a.dim(), *tol);
    model.add_observable(a.clone())?;
    model.add_observable(b.clone())?;
    let datum = crate::contextual::ops::ftp_interference(&model, rho, a.name(), b.name(), y)?;
    Ok(QuantumInterference {
        delta_cross_terms: cross,
        datum,
    })
}
