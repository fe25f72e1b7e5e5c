//! Model file loading: a JSON tree per backend kind, validated invariant by
//! invariant with named residuals before any command runs.
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major nested
//! arrays of those pairs; states are either amplitude vectors or density
//! matrices.

use crate::error::CliError;
use cmm_core::classical::{ClassicalModel, Event, FiniteProbSpace, RandomVariable};
use cmm_core::contextual::OutcomeValue;
use cmm_core::linalg::{hermitian_eig, CMatrix, C64};
use cmm_core::lsr::{MInstrument, MeasureModel, MeasureVector};
use cmm_core::quantum::{DensityMatrix, HermitianObservable, Instrument, QuantumModel};
use cmm_core::Tolerances;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// One validated invariant.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct CheckItem {
    pub invariant: String,
    pub passed: bool,
    pub residual: f64,
}

impl CheckItem {
    fn new(invariant: impl Into<String>, residual: f64, tol: f64) -> CheckItem {
        CheckItem {
            invariant: invariant.into(),
            passed: residual <= tol,
            residual,
        }
    }

    fn flag(invariant: impl Into<String>, passed: bool) -> CheckItem {
        CheckItem {
            invariant: invariant.into(),
            passed,
            residual: if passed { 0.0 } else { f64::INFINITY },
        }
    }
}

/// A loaded backend.
pub enum Backend {
    Classical(ClassicalModel),
    Quantum(QuantumModel),
    Measure(MeasureModel),
}

impl Backend {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Backend::Classical(_) => "classical",
            Backend::Quantum(_) => "quantum",
            Backend::Measure(_) => "measure_lsr",
        }
    }
}

pub struct LoadedModel {
    pub backend: Backend,
    pub checks: Vec<CheckItem>,
    pub digest: String,
    /// True when the model draws seeded default context samples.
    pub randomized_defaults: bool,
}

pub fn load(path: &str, overrides: &[(String, f64)]) -> Result<LoadedModel, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::usage(format!("cannot read model file `{path}`: {e}")))?;
    let digest = hex_digest(&bytes);
    let value: Value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::validation(format!("parse error in `{path}`: {e}")))?;
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::validation("model file is missing the `kind` field"))?
        .to_string();

    let mut tolerances = Tolerances::default();
    if let Some(tols) = value.get("tolerances") {
        let map: BTreeMap<String, f64> = serde_json::from_value(tols.clone())
            .map_err(|e| CliError::validation(format!("bad `tolerances` block: {e}")))?;
        for (k, v) in map {
            tolerances.set(&k, v).map_err(CliError::validation)?;
        }
    }
    for (k, v) in overrides {
        tolerances.set(k, *v).map_err(CliError::usage)?;
    }

    let (backend, checks) = match kind.as_str() {
        "classical" => build_classical(&value, &tolerances)?,
        "von_neumann" | "instrument" => build_quantum(&value, &tolerances, &kind)?,
        "measure_lsr" => build_measure(&value, &tolerances)?,
        other => {
            return Err(CliError::validation(format!(
                "unknown model kind `{other}` (expected classical, von_neumann, instrument, or measure_lsr)"
            )))
        }
    };
    let randomized_defaults = matches!(backend, Backend::Quantum(_));
    Ok(LoadedModel {
        backend,
        checks,
        digest,
        randomized_defaults,
    })
}

fn hex_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn field<T: serde::de::DeserializeOwned>(value: &Value, name: &str) -> Result<T, CliError> {
    let v = value
        .get(name)
        .ok_or_else(|| CliError::validation(format!("missing field `{name}`")))?;
    serde_json::from_value(v.clone())
        .map_err(|e| CliError::validation(format!("field `{name}`: {e}")))
}

fn optional_field<T: serde::de::DeserializeOwned>(
    value: &Value,
    name: &str,
) -> Result<Option<T>, CliError> {
    match value.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| CliError::validation(format!("field `{name}`: {e}"))),
    }
}

// ---------------------------------------------------------------------------
// classical
// ---------------------------------------------------------------------------

fn build_classical(value: &Value, tol: &Tolerances) -> Result<(Backend, Vec<CheckItem>), CliError> {
    let points: Vec<String> = field(value, "points")?;
    let weights: Vec<f64> = field(value, "weights")?;
    let variables: BTreeMap<String, Vec<f64>> = field(value, "variables")?;
    let contexts: Option<BTreeMap<String, Vec<String>>> = optional_field(value, "contexts")?;

    let mut checks = Vec::new();
    checks.push(CheckItem::flag(
        format!(
            "points ({}) and weights ({}) align",
            points.len(),
            weights.len()
        ),
        points.len() == weights.len() && !points.is_empty() && points.len() <= 64,
    ));
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            checks.push(CheckItem::flag(
                format!(
                    "weight of point `{}` >= 0",
                    points.get(i).map(String::as_str).unwrap_or("?")
                ),
                false,
            ));
        }
    }
    let sum: f64 = weights.iter().sum();
    checks.push(CheckItem::new(
        "weights sum to 1",
        (sum - 1.0).abs(),
        tol.weights_sum,
    ));
    for (name, values) in &variables {
        checks.push(CheckItem::flag(
            format!("variable `{name}` is total on the sample space"),
            values.len() == points.len() && values.iter().all(|v| v.is_finite()),
        ));
    }

    if checks.iter().any(|c| !c.passed) {
        return Err(CliError::failed_validation(checks));
    }

    let space = FiniteProbSpace::new(points.clone(), weights, tol).map_err(CliError::from_core)?;
    let mut model = ClassicalModel::new(space, *tol);
    for (name, values) in variables {
        model
            .add_variable(RandomVariable::new(name, values).map_err(CliError::from_core)?)
            .map_err(CliError::from_core)?;
    }
    if let Some(contexts) = contexts {
        for (name, members) in contexts {
            let mut indices = Vec::new();
            for label in &members {
                let idx = points.iter().position(|p| p == label).ok_or_else(|| {
                    CliError::validation(format!(
                        "context `{name}` references unknown point `{label}`"
                    ))
                })?;
                indices.push(idx);
            }
            let event = Event::from_indices(&indices);
            checks.push(CheckItem::flag(
                format!("context `{name}` has positive probability"),
                model.space().prob(event) > tol.eps_cond,
            ));
            model
                .add_context(name, event)
                .map_err(CliError::from_core)?;
        }
    }
    Ok((Backend::Classical(model), checks))
}

// ---------------------------------------------------------------------------
// quantum (von_neumann / instrument)
// ---------------------------------------------------------------------------

type RawComplex = [f64; 2];
type RawMatrix = Vec<Vec<RawComplex>>;

#[derive(Deserialize)]
struct StateSpec {
    #[serde(default)]
    vector: Option<Vec<RawComplex>>,
    #[serde(default)]
    matrix: Option<RawMatrix>,
}

#[derive(Deserialize)]
struct InstrumentSpec {
    kind: String,
    #[serde(default)]
    observable: Option<String>,
    #[serde(default)]
    outcomes: Option<Vec<Value>>,
    #[serde(default)]
    projectors: Option<Vec<RawMatrix>>,
    #[serde(default)]
    kraus: Option<Vec<RawMatrix>>,
    #[serde(default)]
    effects: Option<Vec<RawMatrix>>,
    #[serde(default)]
    prepare: Option<Vec<StateSpec>>,
    #[serde(default)]
    superoperators: Option<Vec<RawMatrix>>,
}

fn to_cmatrix(raw: &RawMatrix, what: &str) -> Result<CMatrix, CliError> {
    let rows: Vec<Vec<C64>> = raw
        .iter()
        .map(|row| row.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    CMatrix::from_rows(rows).map_err(|e| CliError::validation(format!("{what}: {e}")))
}

fn to_outcomes(
    raw: &Option<Vec<Value>>,
    count: usize,
    what: &str,
) -> Result<Vec<OutcomeValue>, CliError> {
    match raw {
        None => Ok((0..count)
            .map(|i| OutcomeValue::numeric(i as f64))
            .collect()),
        Some(list) => {
            if list.len() != count {
                return Err(CliError::validation(format!(
                    "{what}: {} outcomes declared for {count} operators",
                    list.len()
                )));
            }
            list.iter()
                .map(|v| match v {
                    Value::Number(n) => Ok(OutcomeValue::numeric(n.as_f64().unwrap())),
                    Value::String(s) => Ok(OutcomeValue::labelled(s.clone())),
                    other => Err(CliError::validation(format!(
                        "{what}: outcome `{other}` must be a number or string"
                    ))),
                })
                .collect()
        }
    }
}

fn state_from_spec(
    spec: &StateSpec,
    name: &str,
    tol: &Tolerances,
) -> Result<(DensityMatrix, Vec<CheckItem>), CliError> {
    let mut checks = Vec::new();
    match (&spec.vector, &spec.matrix) {
        (Some(vector), None) => {
            let amps: Vec<C64> = vector.iter().map(|&[re, im]| C64::new(re, im)).collect();
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            checks.push(CheckItem::flag(
                format!("state `{name}` vector has positive norm"),
                norm > 0.0 && norm.is_finite(),
            ));
            let state = DensityMatrix::from_pure(&amps).map_err(CliError::from_core)?;
            Ok((state, checks))
        }
        (None, Some(matrix)) => {
            let mat = to_cmatrix(matrix, &format!("state `{name}`"))?;
            checks.push(CheckItem::new(
                format!("state `{name}` is Hermitian"),
                mat.hermitian_residual(),
                tol.state,
            ));
            let trace = mat.trace().map_err(CliError::from_core)?;
            checks.push(CheckItem::new(
                format!("state `{name}` trace = 1"),
                (trace.re - 1.0).abs().max(trace.im.abs()),
                tol.state,
            ));
            if checks.iter().all(|c| c.passed) {
                let eig = hermitian_eig(&mat, tol.cluster_rel, tol.state.max(tol.hermitian))
                    .map_err(CliError::from_core)?;
                let min = eig.eigenvalues().first().copied().unwrap_or(0.0);
                checks.push(CheckItem::new(
                    format!("state `{name}` is positive semidefinite"),
                    (-min).max(0.0),
                    tol.psd,
                ));
            }
            if checks.iter().any(|c| !c.passed) {
                return Err(CliError::failed_validation(checks));
            }
            let state = DensityMatrix::new(mat, tol).map_err(CliError::from_core)?;
            Ok((state, checks))
        }
        _ => Err(CliError::validation(format!(
            "state `{name}` must have exactly one of `vector` or `matrix`"
        ))),
    }
}

fn build_quantum(
    value: &Value,
    tol: &Tolerances,
    kind: &str,
) -> Result<(Backend, Vec<CheckItem>), CliError> {
    let states: BTreeMap<String, StateSpec> = field(value, "states")?;
    let observables: Option<BTreeMap<String, RawMatrix>> = optional_field(value, "observables")?;
    let instruments: Option<BTreeMap<String, InstrumentSpec>> =
        optional_field(value, "instruments")?;

    let mut checks = Vec::new();
    let mut parsed_states = Vec::new();
    for (name, spec) in &states {
        let (state, mut cs) = state_from_spec(spec, name, tol)?;
        checks.append(&mut cs);
        parsed_states.push((name.clone(), state));
    }
    let dim = parsed_states
        .first()
        .map(|(_, s)| s.dim())
        .ok_or_else(|| CliError::validation("quantum model needs at least one state"))?;
    checks.push(CheckItem::flag(
        format!("model dimension {dim} is within the supported range (2..=16)"),
        (2..=16).contains(&dim),
    ));
    for (name, s) in &parsed_states {
        checks.push(CheckItem::flag(
            format!("state `{name}` matches model dimension {dim}"),
            s.dim() == dim,
        ));
    }
    if checks.iter().any(|c| !c.passed) {
        return Err(CliError::failed_validation(checks));
    }

    let mut model = QuantumModel::new(dim, *tol);
    for (name, s) in parsed_states {
        model.add_state(name, s).map_err(CliError::from_core)?;
    }

    if let Some(observables) = observables {
        for (name, raw) in observables {
            let mat = to_cmatrix(&raw, &format!("observable `{name}`"))?;
            checks.push(CheckItem::new(
                format!("observable `{name}` is Hermitian"),
                mat.hermitian_residual(),
                tol.hermitian,
            ));
            if !checks.last().unwrap().passed {
                return Err(CliError::failed_validation(checks));
            }
            let obs = HermitianObservable::new(name, mat, tol).map_err(CliError::from_core)?;
            model.add_observable(obs).map_err(CliError::from_core)?;
        }
    }

    if kind == "von_neumann" && instruments.is_some() {
        return Err(CliError::validation(
            "a von_neumann model carries only Lüders instruments; use kind \"instrument\" to declare more",
        ));
    }

    if let Some(instruments) = instruments {
        for (name, spec) in instruments {
            build_instrument(&mut model, &name, &spec, dim, tol, &mut checks)?;
        }
    }
    Ok((Backend::Quantum(model), checks))
}

fn build_instrument(
    model: &mut QuantumModel,
    name: &str,
    spec: &InstrumentSpec,
    dim: usize,
    tol: &Tolerances,
    checks: &mut Vec<CheckItem>,
) -> Result<(), CliError> {
    let built = match spec.kind.as_str() {
        "projection" => match (&spec.observable, &spec.projectors) {
            (Some(obs), None) => {
                let observable = model.hermitian(obs).map_err(CliError::from_core)?.clone();
                let inst =
                    Instrument::luders(name, &observable, tol).map_err(CliError::from_core)?;
                checks.push(CheckItem::flag(
                    format!("instrument `{name}` projectors decompose the identity"),
                    true,
                ));
                model
                    .add_instrument(inst, Some(obs))
                    .map_err(CliError::from_core)?;
                return Ok(());
            }
            (None, Some(raws)) => {
                let projectors: Vec<CMatrix> = raws
                    .iter()
                    .enumerate()
                    .map(|(i, r)| to_cmatrix(r, &format!("projector {i} of `{name}`")))
                    .collect::<Result<_, _>>()?;
                let outcomes = to_outcomes(&spec.outcomes, projectors.len(), name)?;
                let completeness = sum_residual(&projectors, dim)?;
                checks.push(CheckItem::new(
                    format!("instrument `{name}` projectors sum to identity"),
                    completeness,
                    tol.povm,
                ));
                Instrument::projection(name, outcomes, projectors, tol)
            }
            _ => {
                return Err(CliError::validation(format!(
                    "projection instrument `{name}` needs `observable` or `projectors`"
                )))
            }
        },
        "atomic" => {
            let raws = spec.kraus.as_ref().ok_or_else(|| {
                CliError::validation(format!("atomic instrument `{name}` needs `kraus`"))
            })?;
            let kraus: Vec<CMatrix> = raws
                .iter()
                .enumerate()
                .map(|(i, r)| to_cmatrix(r, &format!("Kraus operator {i} of `{name}`")))
                .collect::<Result<_, _>>()?;
            let outcomes = to_outcomes(&spec.outcomes, kraus.len(), name)?;
            let vv: Vec<CMatrix> = kraus
                .iter()
                .map(|v| v.mul(&v.adjoint()).map_err(CliError::from_core))
                .collect::<Result<_, _>>()?;
            checks.push(CheckItem::new(
                format!("instrument `{name}` satisfies sum V V* = I"),
                sum_residual(&vv, dim)?,
                tol.povm,
            ));
            let vtv: Vec<CMatrix> = kraus
                .iter()
                .map(|v| v.adjoint().mul(v).map_err(CliError::from_core))
                .collect::<Result<_, _>>()?;
            checks.push(CheckItem::new(
                format!("instrument `{name}` is trace preserving"),
                sum_residual(&vtv, dim)?,
                tol.povm,
            ));
            Instrument::atomic(name, outcomes, kraus, tol)
        }
        "measure_and_prepare" => {
            let raws = spec.effects.as_ref().ok_or_else(|| {
                CliError::validation(format!("instrument `{name}` needs `effects`"))
            })?;
            let prepare = spec.prepare.as_ref().ok_or_else(|| {
                CliError::validation(format!("instrument `{name}` needs `prepare`"))
            })?;
            let effects: Vec<CMatrix> = raws
                .iter()
                .enumerate()
                .map(|(i, r)| to_cmatrix(r, &format!("effect {i} of `{name}`")))
                .collect::<Result<_, _>>()?;
            checks.push(CheckItem::new(
                format!("instrument `{name}` effects sum to identity"),
                sum_residual(&effects, dim)?,
                tol.povm,
            ));
            let mut prepared = Vec::new();
            for (i, s) in prepare.iter().enumerate() {
                let (state, mut cs) = state_from_spec(s, &format!("{name}.prepare[{i}]"), tol)?;
                checks.append(&mut cs);
                prepared.push(state);
            }
            let outcomes = to_outcomes(&spec.outcomes, effects.len(), name)?;
            Instrument::measure_and_prepare(name, outcomes, effects, prepared, tol)
        }
        "general" => {
            let raws = spec.superoperators.as_ref().ok_or_else(|| {
                CliError::validation(format!("instrument `{name}` needs `superoperators`"))
            })?;
            let superops: Vec<CMatrix> = raws
                .iter()
                .enumerate()
                .map(|(i, r)| to_cmatrix(r, &format!("superoperator {i} of `{name}`")))
                .collect::<Result<_, _>>()?;
            let outcomes = to_outcomes(&spec.outcomes, superops.len(), name)?;
            Instrument::general(name, outcomes, superops, dim, tol)
        }
        other => {
            return Err(CliError::validation(format!(
                "instrument `{name}` has unknown kind `{other}`"
            )))
        }
    };
    let inst = match built {
        Ok(inst) => inst,
        Err(e) => {
            checks.push(CheckItem::flag(format!("instrument `{name}`: {e}"), false));
            return Err(CliError::failed_validation(checks.clone()));
        }
    };
    checks.push(CheckItem::flag(
        format!("instrument `{name}` passes its structural invariants"),
        true,
    ));
    model
        .add_instrument(inst, spec.observable.as_deref())
        .map_err(CliError::from_core)?;
    Ok(())
}

fn sum_residual(family: &[CMatrix], dim: usize) -> Result<f64, CliError> {
    let mut total = CMatrix::zeros(dim, dim);
    for m in family {
        if m.rows() != dim || m.cols() != dim {
            return Err(CliError::validation(format!(
                "operator is {}x{}, expected {dim}x{dim}",
                m.rows(),
                m.cols()
            )));
        }
        total = total.add(m).map_err(CliError::from_core)?;
    }
    total
        .sub(&CMatrix::identity(dim))
        .map(|d| d.max_norm())
        .map_err(CliError::from_core)
}

// ---------------------------------------------------------------------------
// measure_lsr
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct MInstrumentSpec {
    #[serde(default)]
    outcomes: Option<Vec<Value>>,
    matrices: Vec<Vec<Vec<f64>>>,
}

fn build_measure(value: &Value, tol: &Tolerances) -> Result<(Backend, Vec<CheckItem>), CliError> {
    let points: Vec<String> = field(value, "points")?;
    let states: BTreeMap<String, Vec<f64>> = field(value, "states")?;
    let instruments: BTreeMap<String, MInstrumentSpec> = field(value, "instruments")?;
    let dim = points.len();

    let mut checks = Vec::new();
    let mut model = MeasureModel::new(points, *tol);
    for (name, values) in states {
        let negative = values.iter().cloned().fold(0.0f64, |acc, v| acc.max(-v));
        checks.push(CheckItem::new(
            format!("state `{name}` is nonnegative"),
            negative,
            0.0,
        ));
        let mass: f64 = values.iter().sum();
        checks.push(CheckItem::new(
            format!("state `{name}` has total mass 1"),
            (mass - 1.0).abs(),
            tol.weights_sum,
        ));
        if checks.iter().any(|c| !c.passed) {
            return Err(CliError::failed_validation(checks));
        }
        let mu = MeasureVector::state(values, tol).map_err(CliError::from_core)?;
        model.add_state(name, mu).map_err(CliError::from_core)?;
    }
    for (name, spec) in instruments {
        let outcomes = to_outcomes(&spec.outcomes, spec.matrices.len(), &name)?;
        let negative = spec
            .matrices
            .iter()
            .flatten()
            .flatten()
            .cloned()
            .fold(0.0f64, |acc, v| acc.max(-v));
        checks.push(CheckItem::new(
            format!("instrument `{name}` preserves the positive cone"),
            negative,
            0.0,
        ));
        let mut column_residual = 0.0f64;
        for j in 0..dim {
            let col: f64 = spec
                .matrices
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|row| row.get(j).copied().unwrap_or(f64::NAN))
                        .sum::<f64>()
                })
                .sum();
            column_residual = column_residual.max((col - 1.0).abs());
        }
        checks.push(CheckItem::new(
            format!("instrument `{name}` total is column-stochastic"),
            column_residual,
            tol.povm,
        ));
        if checks.iter().any(|c| !c.passed) {
            return Err(CliError::failed_validation(checks));
        }
        let inst = MInstrument::new(&name, outcomes, spec.matrices, dim, tol)
            .map_err(CliError::from_core)?;
        model.add_instrument(inst).map_err(CliError::from_core)?;
    }
    Ok((Backend::Measure(model), checks))
}
