//! Linear-space representations.
//!
//! Two constructions over finite index sets: a measurement model whose
//! states are probability measures (instruments are entrywise-nonnegative
//! matrices with a column-stochastic total, effects come from the adjoint
//! applied to the all-ones functional), and the embedding of any contextual
//! model's contexts into the function space over (observable, outcome)
//! pairs.

use crate::contextual::{ops, ContextualModel, OutcomeValue};
use crate::error::{CmmError, Result};
use crate::tolerance::Tolerances;
use std::collections::BTreeMap;

/// Signed measure over a finite point set, as a value per point.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureVector {
    values: Vec<f64>,
}

impl MeasureVector {
    pub fn new(values: Vec<f64>) -> Result<MeasureVector> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CmmError::Input("measure with non-finite value".into()));
        }
        Ok(MeasureVector { values })
    }

    /// A state: nonnegative with total mass one.
    pub fn state(values: Vec<f64>, tol: &Tolerances) -> Result<MeasureVector> {
        let m = MeasureVector::new(values)?;
        if let Some((i, &v)) = m.values.iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(CmmError::invariant(format!("state value {i} >= 0"), -v));
        }
        let mass = m.total_mass();
        if (mass - 1.0).abs() > tol.weights_sum {
            return Err(CmmError::invariant(
                "state has total mass 1",
                (mass - 1.0).abs(),
            ));
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Convex mixture.
    pub fn mix(&self, other: &MeasureVector, p: f64) -> Result<MeasureVector> {
        if self.len() != other.len() {
            return Err(CmmError::Shape(
                "mixing measures of different support".into(),
            ));
        }
        Ok(MeasureVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| p * a + (1.0 - p) * b)
                .collect(),
        })
    }
}

/// Effect: a linear functional with per-point coefficients. On a finite
/// space it maps every state into [0, 1] exactly when all coefficients lie
/// in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct MEffect {
    coefficients: Vec<f64>,
}

impl MEffect {
    pub fn new(coefficients: Vec<f64>, tol: &Tolerances) -> Result<MEffect> {
        for (i, &c) in coefficients.iter().enumerate() {
            if !(-tol.povm..=1.0 + tol.povm).contains(&c) {
                return Err(CmmError::invariant(
                    format!("effect coefficient {i} in [0, 1]"),
                    if c < 0.0 { -c } else { c - 1.0 },
                ));
            }
        }
        Ok(MEffect { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Apply the functional to a measure.
    pub fn eval(&self, mu: &MeasureVector) -> Result<f64> {
        if self.coefficients.len() != mu.len() {
            return Err(CmmError::Shape(
                "effect and measure have different support".into(),
            ));
        }
        Ok(self
            .coefficients
            .iter()
            .zip(mu.values())
            .map(|(c, v)| c * v)
            .sum())
    }
}

/// Measure-space instrument: one entrywise-nonnegative matrix per outcome,
/// with a column-stochastic total so states map to states.
#[derive(Debug, Clone)]
pub struct MInstrument {
    name: String,
    outcomes: Vec<OutcomeValue>,
    matrices: Vec<Vec<Vec<f64>>>,
}

impl MInstrument {
    pub fn new(
        name: impl Into<String>,
        outcomes: Vec<OutcomeValue>,
        matrices: Vec<Vec<Vec<f64>>>,
        dim: usize,
        tol: &Tolerances,
    ) -> Result<MInstrument> {
        let name = name.into();
        if outcomes.is_empty() || outcomes.len() != matrices.len() {
            return Err(CmmError::Shape(format!(
                "`{name}`: {} matrices for {} outcomes",
                matrices.len(),
                outcomes.len()
            )));
        }
        for (x, m) in matrices.iter().enumerate() {
            if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                return Err(CmmError::Shape(format!(
                    "`{name}`: matrix {x} is not {dim}x{dim}"
                )));
            }
            for row in m {
                for &v in row {
                    if !v.is_finite() || v < 0.0 {
                        return Err(CmmError::invariant(
                            format!("matrix {x} of `{name}` preserves the positive cone"),
                            if v < 0.0 { -v } else { f64::INFINITY },
                        ));
                    }
                }
            }
        }
        // Column sums of the total must be one.
        for j in 0..dim {
            let col: f64 = matrices
                .iter()
                .map(|m| (0..dim).map(|i| m[i][j]).sum::<f64>())
                .sum();
            if (col - 1.0).abs() > tol.povm {
                return Err(CmmError::invariant(
                    format!("total of `{name}` is column-stochastic (column {j})"),
                    (col - 1.0).abs(),
                ));
            }
        }
        Ok(MInstrument {
            name,
            outcomes,
            matrices,
        })
    }

    /// Conditioning instrument of a partition: diagonal indicator matrices.
    pub fn conditioning(
        name: impl Into<String>,
        outcomes: Vec<OutcomeValue>,
        membership: &[usize],
        tol: &Tolerances,
    ) -> Result<MInstrument> {
        let dim = membership.len();
        let k = outcomes.len();
        let mut matrices = vec![vec![vec![0.0; dim]; dim]; k];
        for (point, &cell) in membership.iter().enumerate() {
            if cell >= k {
                return Err(CmmError::Input(format!(
                    "membership index {cell} out of outcome range"
                )));
            }
            matrices[cell][point][point] = 1.0;
        }
        MInstrument::new(name, outcomes, matrices, dim, tol)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn outcomes(&self) -> &[OutcomeValue] {
        &self.outcomes
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].len()
    }

    fn apply_matrix(&self, outcome: usize, mu: &MeasureVector) -> Result<Vec<f64>> {
        let m = self.matrices.get(outcome).ok_or_else(|| {
            CmmError::Lookup(format!(
                "outcome index {outcome} out of range for instrument {}",
                self.name
            ))
        })?;
        if mu.len() != self.dim() {
            return Err(CmmError::Shape("measure has wrong support size".into()));
        }
        Ok((0..self.dim())
            .map(|i| (0..self.dim()).map(|j| m[i][j] * mu.values()[j]).sum())
            .collect())
    }

    /// Apply one outcome map: outcome probability (total output mass) and
    /// the normalized updated state when that mass is positive.
    pub fn apply(
        &self,
        outcome: usize,
        mu: &MeasureVector,
        tol: &Tolerances,
    ) -> Result<(f64, Option<MeasureVector>)> {
        let image = self.apply_matrix(outcome, mu)?;
        let prob: f64 = image.iter().sum();
        if prob > tol.eps_cond {
            let updated = MeasureVector {
                values: image.iter().map(|v| v / prob).collect(),
            };
            Ok((prob, Some(updated)))
        } else {
            Ok((prob.max(0.0), None))
        }
    }

    /// Effects through the adjoint applied to the all-ones functional: the
    /// coefficients are the column sums of each outcome matrix; they sum to
    /// the unit functional.
    pub fn povm(&self, tol: &Tolerances) -> Result<Vec<MEffect>> {
        let dim = self.dim();
        self.matrices
            .iter()
            .map(|m| {
                let coeffs: Vec<f64> = (0..dim).map(|j| (0..dim).map(|i| m[i][j]).sum()).collect();
                MEffect::new(coeffs, tol)
            })
            .collect()
    }
}

/// Contextual model over measure-valued states.
#[derive(Debug, Clone)]
pub struct MeasureModel {
    point_labels: Vec<String>,
    states: BTreeMap<String, MeasureVector>,
    instruments: BTreeMap<String, MInstrument>,
    tolerances: Tolerances,
}

impl MeasureModel {
    pub fn new(point_labels: Vec<String>, tolerances: Tolerances) -> MeasureModel {
        MeasureModel {
            point_labels,
            states: BTreeMap::new(),
            instruments: BTreeMap::new(),
            tolerances,
        }
    }

    pub fn dim(&self) -> usize {
        self.point_labels.len()
    }

    pub fn add_state(&mut self, name: impl Into<String>, mu: MeasureVector) -> Result<()> {
        if mu.len() != self.dim() {
            return Err(CmmError::Shape("state has wrong support size".into()));
        }
        // Re-validate as a state against this model's tolerances.
        let mu = MeasureVector::state(mu.values().to_vec(), &self.tolerances)?;
        self.states.insert(name.into(), mu);
        Ok(())
    }

    pub fn add_instrument(&mut self, inst: MInstrument) -> Result<()> {
        if inst.dim() != self.dim() {
            return Err(CmmError::Shape(format!(
                "instrument {} has wrong support size",
                inst.name()
            )));
        }
        self.instruments.insert(inst.name().to_string(), inst);
        Ok(())
    }

    pub fn instrument(&self, name: &str) -> Result<&MInstrument> {
        self.instruments
            .get(name)
            .ok_or_else(|| CmmError::Lookup(format!("unknown instrument `{name}`")))
    }
}

impl ContextualModel for MeasureModel {
    type Context = MeasureVector;

    fn observables(&self) -> Vec<String> {
        self.instruments.keys().cloned().collect()
    }

    fn outcomes(&self, observable: &str) -> Result<Vec<OutcomeValue>> {
        Ok(self.instrument(observable)?.outcomes().to_vec())
    }

    fn instruments_for(&self, observable: &str) -> Result<Vec<String>> {
        self.instrument(observable)?;
        Ok(vec![observable.to_string()])
    }

    fn instrument_observable(&self, instrument: &str) -> Result<String> {
        self.instrument(instrument)?;
        Ok(instrument.to_string())
    }

    fn prob_dist(&self, context: &MeasureVector, observable: &str) -> Result<Vec<f64>> {
        let inst = self.instrument(observable)?;
        (0..inst.outcomes().len())
            .map(|x| inst.apply(x, context, &self.tolerances).map(|(p, _)| p))
            .collect()
    }

    fn update(
        &self,
        context: &MeasureVector,
        instrument: &str,
        outcome: usize,
    ) -> Result<MeasureVector> {
        let inst = self.instrument(instrument)?;
        let (_, updated) = inst.apply(outcome, context, &self.tolerances)?;
        updated.ok_or_else(|| CmmError::Conditioning {
            context: self.describe_context(context),
            observable: instrument.to_string(),
            outcome: inst.outcomes()[outcome].label.clone(),
        })
    }

    fn context_names(&self) -> Vec<String> {
        self.states.keys().cloned().collect()
    }

    fn context(&self, name: &str) -> Result<MeasureVector> {
        self.states
            .get(name)
            .cloned()
            .ok_or_else(|| CmmError::Lookup(format!("unknown state `{name}`")))
    }

    fn describe_context(&self, context: &MeasureVector) -> String {
        for (name, mu) in &self.states {
            if mu == context {
                return name.clone();
            }
        }
        format!("measure({} points)", context.len())
    }

    fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }
}

/// Embedding of contexts into the function space over (observable, outcome)
/// pairs: each context becomes the vector of its outcome probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MackeyEmbedding {
    /// Coordinate index: (observable, outcome label) per column.
    pub coordinates: Vec<(String, String)>,
    /// Embedded contexts: label and coordinate vector, one row per context.
    pub rows: Vec<(String, Vec<f64>)>,
    /// Injective on the sample.
    pub separated: bool,
    /// A colliding pair of context labels when not separated.
    pub collision: Option<(String, String)>,
}

impl MackeyEmbedding {
    /// Column index of the (observable, outcome) coordinate.
    pub fn coordinate_index(&self, observable: &str, outcome_label: &str) -> Option<usize> {
        self.coordinates
            .iter()
            .position(|(o, x)| o == observable && x == outcome_label)
    }

    /// Embedded vector of a context by label.
    pub fn row(&self, context: &str) -> Option<&[f64]> {
        self.rows
            .iter()
            .find(|(label, _)| label == context)
            .map(|(_, v)| v.as_slice())
    }

    /// Matrix export: header of coordinate names plus one CSV row per
    /// context.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("context");
        for (obs, x) in &self.coordinates {
            out.push_str(&format!(",{obs}={x}"));
        }
        out.push('\n');
        for (label, values) in &self.rows {
            out.push_str(label);
            for v in values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Embed labelled contexts through their outcome distributions over the
/// given observables, and report whether the sample stays injective.
pub fn mackey_embed<M: ContextualModel>(
    model: &M,
    contexts: &[(String, M::Context)],
    observables: &[String],
) -> Result<MackeyEmbedding> {
    let mut coordinates = Vec::new();
    for obs in observables {
        for outcome in model.outcomes(obs)? {
            coordinates.push((obs.clone(), outcome.label));
        }
    }
    let mut rows = Vec::with_capacity(contexts.len());
    for (label, ctx) in contexts {
        let mut vector = Vec::with_capacity(coordinates.len());
        for obs in observables {
            vector.extend(ops::prob_dist(model, ctx, obs)?);
        }
        rows.push((label.clone(), vector));
    }
    let tol = model.tolerances().separation;
    let mut separated = true;
    let mut collision = None;
    'outer: for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let max_diff = rows[i]
                .1
                .iter()
                .zip(&rows[j].1)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if max_diff <= tol {
                separated = false;
                collision = Some((rows[i].0.clone(), rows[j].0.clone()));
                break 'outer;
            }
        }
    }
    Ok(MackeyEmbedding {
        coordinates,
        rows,
        separated,
        collision,
    })
}

/// Read the affine effect functional `f_{A,x}` off an embedded vector: it is
/// the (A, x) coordinate, so it is exactly affine in mixtures.
pub fn effect_eval(
    embedding: &MackeyEmbedding,
    observable: &str,
    outcome_label: &str,
    vector: &[f64],
) -> Result<f64> {
    let idx = embedding
        .coordinate_index(observable, outcome_label)
        .ok_or_else(|| {
            CmmError::Lookup(format!("no coordinate for ({observable}, {outcome_label})"))
        })?;
    vector
        .get(idx)
        .copied()
        .ok_or_else(|| CmmError::Shape("vector shorter than the coordinate index".into()))
}
