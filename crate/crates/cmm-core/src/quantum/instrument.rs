//! Quantum instruments, the POVMs they induce, complete-positivity checks,
//! and POVM compatibility.
//!
//! Superoperators act on column-vectorized operators, so the map
//! `rho -> V rho V^dagger` has matrix `conj(V) (x) V`. Adjoints are taken
//! with respect to the trace inner product on operators, which in the
//! vectorized picture is the ordinary conjugate transpose.

use super::{DensityMatrix, HermitianObservable};
use crate::contextual::OutcomeValue;
use crate::error::{CmmError, Result};
use crate::linalg::{psd_check, CMatrix, C64};
use crate::sampler::CounterRng;
use crate::tolerance::Tolerances;

/// The structural families of instruments the backend understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrumentKind {
    /// `I(x) rho = E(x) rho E(x)` for an orthogonal decomposition of the
    /// identity.
    Projection,
    /// Single Kraus operator per outcome: `I(x) rho = V(x) rho V(x)^dagger`.
    Atomic,
    /// `I(x) rho = Tr(A(x) rho) phi_x` for effects A(x) and prepared states.
    MeasureAndPrepare,
    /// Arbitrary outcome-indexed superoperators given as matrices on
    /// vectorized operators.
    General,
}

#[derive(Debug, Clone)]
enum InstrumentData {
    Projection {
        projectors: Vec<CMatrix>,
    },
    Atomic {
        kraus: Vec<CMatrix>,
    },
    MeasureAndPrepare {
        effects: Vec<CMatrix>,
        prepared: Vec<DensityMatrix>,
    },
    General {
        superops: Vec<CMatrix>,
    },
}

/// Outcome-indexed family of positive superoperators whose total is trace
/// preserving on states.
#[derive(Debug, Clone)]
pub struct Instrument {
    name: String,
    dim: usize,
    outcomes: Vec<OutcomeValue>,
    data: InstrumentData,
}

/// Result of applying one outcome map.
#[derive(Debug, Clone)]
pub struct InstrumentOutput {
    /// `I(x) rho`, not normalized.
    pub subnormalized: CMatrix,
    /// `Tr(I(x) rho)`.
    pub prob: f64,
    /// Normalized post-measurement state, absent when the probability is at
    /// or below the conditioning threshold.
    pub updated: Option<DensityMatrix>,
}

impl Instrument {
    /// Projection instrument from explicit projectors.
    pub fn projection(
        name: impl Into<String>,
        outcomes: Vec<OutcomeValue>,
        projectors: Vec<CMatrix>,
        tol: &Tolerances,
    ) -> Result<Instrument> {
        let name = name.into();
        let dim = check_family_shapes(&name, &outcomes, &projectors)?;
        for (k, p) in projectors.iter().enumerate() {
            let herm = p.hermitian_residual();
            if herm > tol.povm {
                return Err(CmmError::invariant(
                    format!("projector {k} of `{name}` is Hermitian"),
                    herm,
                ));
            }
            let idem = p.mul(p)?.sub(p)?.max_norm();
            if idem > tol.povm {
                return Err(CmmError::invariant(
                    format!("projector {k} of `{name}` is idempotent"),
                    idem,
                ));
            }
            for (l, q) in projectors.iter().enumerate() {
                if l != k {
                    let cross = p.mul(q)?.max_norm();
                    if cross > tol.povm {
                        return Err(CmmError::invariant(
                            format!("projectors {k}, {l} of `{name}` are orthogonal"),
                            cross,
                        ));
                    }
                }
            }
        }
        let completeness = sum_matrices(&projectors, dim)
            .sub(&CMatrix::identity(dim))?
            .max_norm();
        if completeness > tol.povm {
            return Err(CmmError::invariant(
                format!("projectors of `{name}` sum to identity"),
                completeness,
            ));
        }
        Ok(Instrument {
            name,
            dim,
            outcomes,
            data: InstrumentData::Projection { projectors },
        })
    }

    /// Lüders instrument of a Hermitian observable: one projector per
    /// clustered eigenvalue.
    pub fn luders(
        name: impl Into<String>,
        observable: &HermitianObservable,
        tol: &Tolerances,
    ) -> Result<Instrument> {
        let outcomes = observable
            .outcomes()
            .iter()
            .map(|&x| OutcomeValue::numeric(x))
            .collect();
        Instrument::projection(
            name,
            outcomes,
            observable.spectral().projectors().to_vec(),
            tol,
        )
    }

    /// Atomic instrument: one Kraus operator per outcome, validated against
    /// both `sum V(x) V(x)^dagger = I` and trace preservation
    /// `sum V(x)^dagger V(x) = I`.
    pub fn atomic(
        name: impl Into<String>,
        outcomes: Vec<OutcomeValue>,
        kraus: Vec<CMatrix>,
        tol: &Tolerances,
    ) -> Result<Instrument> {
        let name = name.into();
        let dim = check_family_shapes(&name, &outcomes, &kraus)?;
        let vv: Vec<CMatrix> = kraus
            .iter()
            .map(|v| v.mul(&v.adjoint()).expect("square"))
            .collect();
        let norm_res = sum_matrices(&vv, dim)
            .sub(&CMatrix::identity(dim))?
            .max_norm();
        if norm_res > tol.povm {
            return Err(CmmError::invariant(
                format!("Kraus family of `{name}` satisfies sum V V* = I"),
                norm_res,
            ));
        }
        let vv_t: Vec<CMatrix> = kraus
            .iter()
            .map(|v| v.adjoint().mul(v).expect("square"))
            .collect();
        let tp_res = sum_matrices(&vv_t, dim)
            .sub(&CMatrix::identity(dim))?
            .max_norm();
        if tp_res > tol.povm {
            return Err(CmmError::invariant(
                format!("Kraus family of `{name}` is trace preserving"),
                tp_res,
            ));
        }
        Ok(Instrument {
            name,
            dim,
            outcomes,
            data: InstrumentData::Atomic { kraus },
        })
    }

    /// Measure-and-prepare instrument: POVM effects plus one prepared state
    /// per outcome.
    pub fn measure_and_prepare(
        name: impl Into<String>,
        outcomes: Vec<OutcomeValue>,
        effects: Vec<CMatrix>,
        prepared: Vec<DensityMatrix>,
        tol: &Tolerances,
    ) -> Result<Instrument> {
        let name = name.into();
        let dim = check_family_shapes(&name, &outcomes, &effects)?;
        if prepared.len() != outcomes.len() {
            return Err(CmmError::Shape(format!(
                "`{name}`: {} prepared states for {} outcomes",
                prepared.len(),
                outcomes.len()
            )));
        }
        for (k, phi) in prepared.iter().enumerate() {
            if phi.dim() != dim {
                return Err(CmmError::Shape(format!(
                    "`{name}`: prepared state {k} has dimension {} (expected {dim})",
                    phi.dim()
                )));
            }
        }
        Povm::new(effects.clone(), tol)?;
        Ok(Instrument {
            name,
            dim,
            outcomes,
            data: InstrumentData::MeasureAndPrepare { effects, prepared },
        })
    }

    /// General instrument from superoperator matrices on vectorized
    /// operators. The total must be trace preserving; positivity of each
    /// outcome map is verified on a seeded sample of positive inputs.
    pub fn general(
        name: impl Into<String>,
        outcomes: Vec<OutcomeValue>,
        superops: Vec<CMatrix>,
        dim: usize,
        tol: &Tolerances,
    ) -> Result<Instrument> {
        let name = name.into();
        if outcomes.is_empty() || outcomes.len() != superops.len() {
            return Err(CmmError::Shape(format!(
                "`{name}`: {} superoperators for {} outcomes",
                superops.len(),
                outcomes.len()
            )));
        }
        for (k, s) in superops.iter().enumerate() {
            if s.rows() != dim * dim || s.cols() != dim * dim {
                return Err(CmmError::Shape(format!(
                    "`{name}`: superoperator {k} is {}x{}, expected {}x{}",
                    s.rows(),
                    s.cols(),
                    dim * dim,
                    dim * dim
                )));
            }
        }
        // Trace preservation of the total: the adjoint fixes the identity.
        let mut total = CMatrix::zeros(dim * dim, dim * dim);
        for s in &superops {
            total = total.add(s)?;
        }
        let id_vec = CMatrix::identity(dim).vectorize();
        let back = total.adjoint().mul_vec(&id_vec)?;
        let tp_res: f64 = back
            .iter()
            .zip(&id_vec)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if tp_res > tol.povm {
            return Err(CmmError::invariant(
                format!("total of `{name}` is trace preserving"),
                tp_res,
            ));
        }
        // Sampled positivity of each outcome map.
        let mut rng = CounterRng::new(0x5EED);
        for _ in 0..50 {
            let rho = super::random::mixed_state(dim, &mut rng);
            for (k, s) in superops.iter().enumerate() {
                let out = CMatrix::from_vectorized(&s.mul_vec(&rho.matrix().vectorize())?, dim)?;
                let scale = out.max_norm().max(1.0);
                if out.hermitian_residual() > 1e-9 * scale {
                    return Err(CmmError::invariant(
                        format!("outcome map {k} of `{name}` preserves Hermiticity"),
                        out.hermitian_residual(),
                    ));
                }
                if !psd_check(&out, tol.psd * scale, 1e-9 * scale)? {
                    return Err(CmmError::invariant(
                        format!("outcome map {k} of `{name}` is positive (sampled)"),
                        0.0,
                    ));
                }
            }
        }
        Ok(Instrument {
            name,
            dim,
            outcomes,
            data: InstrumentData::General { superops },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> InstrumentKind {
        match &self.data {
            InstrumentData::Projection { .. } => InstrumentKind::Projection,
            InstrumentData::Atomic { .. } => InstrumentKind::Atomic,
            InstrumentData::MeasureAndPrepare { .. } => InstrumentKind::MeasureAndPrepare,
            InstrumentData::General { .. } => InstrumentKind::General,
        }
    }

    pub fn outcomes(&self) -> &[OutcomeValue] {
        &self.outcomes
    }

    /// `I(x) rho` without normalization.
    pub fn subnormalized(&self, outcome: usize, rho: &DensityMatrix) -> Result<CMatrix> {
        if outcome >= self.outcomes.len() {
            return Err(CmmError::Lookup(format!(
                "outcome index {outcome} out of range for instrument {}",
                self.name
            )));
        }
        if rho.dim() != self.dim {
            return Err(CmmError::Shape(format!(
                "instrument {} acts on dimension {}, state has {}",
                self.name,
                self.dim,
                rho.dim()
            )));
        }
        match &self.data {
            InstrumentData::Projection { projectors } => {
                let e = &projectors[outcome];
                e.mul(rho.matrix())?.mul(e)
            }
            InstrumentData::Atomic { kraus } => {
                let v = &kraus[outcome];
                v.mul(rho.matrix())?.mul(&v.adjoint())
            }
            InstrumentData::MeasureAndPrepare { effects, prepared } => {
                let p = effects[outcome].mul(rho.matrix())?.trace()?.re;
                Ok(prepared[outcome].matrix().scale(C64::new(p, 0.0)))
            }
            InstrumentData::General { superops } => CMatrix::from_vectorized(
                &superops[outcome].mul_vec(&rho.matrix().vectorize())?,
                self.dim,
            ),
        }
    }

    /// Apply one outcome map: subnormalized output, its trace, and the
    /// normalized update when the trace is above the conditioning threshold.
    pub fn apply(
        &self,
        outcome: usize,
        rho: &DensityMatrix,
        tol: &Tolerances,
    ) -> Result<InstrumentOutput> {
        let subnormalized = self.subnormalized(outcome, rho)?;
        let prob = subnormalized
            .trace()?
            .re
            .clamp(-1e-12, 1.0 + 1e-12)
            .clamp(0.0, 1.0);
        let updated = if prob > tol.eps_cond {
            Some(DensityMatrix::trusted(
                subnormalized.scale(C64::new(1.0 / prob, 0.0)),
            ))
        } else {
            None
        };
        Ok(InstrumentOutput {
            subnormalized,
            prob,
            updated,
        })
    }

    /// Superoperator matrix of one outcome map on vectorized operators.
    pub fn superop_matrix(&self, outcome: usize) -> Result<CMatrix> {
        if outcome >= self.outcomes.len() {
            return Err(CmmError::Lookup(format!(
                "outcome index {outcome} out of range for instrument {}",
                self.name
            )));
        }
        let d = self.dim;
        Ok(match &self.data {
            InstrumentData::Projection { projectors } => {
                let e = &projectors[outcome];
                e.conj().kron(e)
            }
            InstrumentData::Atomic { kraus } => {
                let v = &kraus[outcome];
                v.conj().kron(v)
            }
            InstrumentData::MeasureAndPrepare { effects, prepared } => {
                let a = &effects[outcome];
                let phi = prepared[outcome].matrix();
                // out[r][c] = phi[r][c] * sum_{k,l} A[k][l] rho[l][k].
                CMatrix::from_fn(d * d, d * d, |ri, ci| {
                    let (r, c) = (ri % d, ri / d);
                    let (l, k) = (ci % d, ci / d);
                    phi[(r, c)] * a[(k, l)]
                })
            }
            InstrumentData::General { superops } => superops[outcome].clone(),
        })
    }

    /// Effect of one outcome through the superoperator adjoint applied to
    /// the identity.
    pub fn effect(&self, outcome: usize) -> Result<CMatrix> {
        let d = self.dim;
        let id_vec = CMatrix::identity(d).vectorize();
        let e_vec = self.superop_matrix(outcome)?.adjoint().mul_vec(&id_vec)?;
        CMatrix::from_vectorized(&e_vec, d)
    }
}

fn check_family_shapes(name: &str, outcomes: &[OutcomeValue], family: &[CMatrix]) -> Result<usize> {
    if outcomes.is_empty() {
        return Err(CmmError::Input(format!(
            "instrument `{name}` has no outcomes"
        )));
    }
    if outcomes.len() != family.len() {
        return Err(CmmError::Shape(format!(
            "`{name}`: {} operators for {} outcomes",
            family.len(),
            outcomes.len()
        )));
    }
    let dim = family[0].rows();
    for (k, m) in family.iter().enumerate() {
        if !m.is_square() || m.rows() != dim {
            return Err(CmmError::Shape(format!(
                "`{name}`: operator {k} is {}x{}, expected {dim}x{dim}",
                m.rows(),
                m.cols()
            )));
        }
    }
    Ok(dim)
}

fn sum_matrices(family: &[CMatrix], dim: usize) -> CMatrix {
    let mut total = CMatrix::zeros(dim, dim);
    for m in family {
        total = total.add(m).expect("same shape");
    }
    total
}

/// Positive operator valued measure: effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>, tol: &Tolerances) -> Result<Povm> {
        if effects.is_empty() {
            return Err(CmmError::Input("POVM with no effects".into()));
        }
        let dim = effects[0].rows();
        for (k, e) in effects.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(CmmError::Shape(format!("effect {k} has wrong shape")));
            }
            let herm = e.hermitian_residual();
            if herm > tol.povm {
                return Err(CmmError::invariant(
                    format!("effect {k} is Hermitian"),
                    herm,
                ));
            }
            if !psd_check(e, tol.psd, tol.povm)? {
                return Err(CmmError::invariant(
                    format!("effect {k} is positive semidefinite"),
                    0.0,
                ));
            }
        }
        let completeness = sum_matrices(&effects, dim)
            .sub(&CMatrix::identity(dim))?
            .max_norm();
        if completeness > tol.povm {
            return Err(CmmError::invariant("effects sum to identity", completeness));
        }
        Ok(Povm { effects })
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    pub fn effect(&self, outcome: usize) -> &CMatrix {
        &self.effects[outcome]
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    /// Additive effect of an outcome subset.
    pub fn effect_of_subset(&self, outcomes: &[usize]) -> Result<CMatrix> {
        let mut total = CMatrix::zeros(self.dim(), self.dim());
        for &x in outcomes {
            if x >= self.effects.len() {
                return Err(CmmError::Lookup(format!("outcome index {x} out of range")));
            }
            total = total.add(&self.effects[x])?;
        }
        Ok(total)
    }

    /// Generalized Born probability `Tr(A(x) rho)`, clamped into [0, 1].
    pub fn prob(&self, outcome: usize, rho: &DensityMatrix) -> Result<f64> {
        if outcome >= self.effects.len() {
            return Err(CmmError::Lookup(format!(
                "outcome index {outcome} out of range"
            )));
        }
        Ok(self.effects[outcome]
            .mul(rho.matrix())?
            .trace()?
            .re
            .clamp(0.0, 1.0))
    }
}

/// Derive the POVM of an instrument via the superoperator adjoints and
/// validate it.
pub fn povm_from_instrument(inst: &Instrument, tol: &Tolerances) -> Result<Povm> {
    let effects: Result<Vec<CMatrix>> =
        (0..inst.outcomes().len()).map(|x| inst.effect(x)).collect();
    Povm::new(effects?, tol)
}

/// Per-outcome complete-positivity verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct CpReport {
    pub per_outcome: Vec<bool>,
}

impl CpReport {
    pub fn all(&self) -> bool {
        self.per_outcome.iter().all(|&b| b)
    }
}

/// Complete-positivity check. Projection, atomic, and measure-and-prepare
/// instruments are completely positive by their Kraus structure; general
/// instruments are tested through the positivity of their Choi matrices.
pub fn cp_check(inst: &Instrument, tol: &Tolerances) -> Result<CpReport> {
    let n = inst.outcomes().len();
    match inst.kind() {
        InstrumentKind::Projection | InstrumentKind::Atomic | InstrumentKind::MeasureAndPrepare => {
            Ok(CpReport {
                per_outcome: vec![true; n],
            })
        }
        InstrumentKind::General => {
            let mut per_outcome = Vec::with_capacity(n);
            for x in 0..n {
                per_outcome.push(choi_is_psd(inst, x, tol)?);
            }
            Ok(CpReport { per_outcome })
        }
    }
}

/// Assemble the Choi matrix of one outcome map and test it for positivity.
fn choi_is_psd(inst: &Instrument, outcome: usize, tol: &Tolerances) -> Result<bool> {
    let d = inst.dim();
    let s = inst.superop_matrix(outcome)?;
    let mut choi = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(i, j)] = C64::new(1.0, 0.0);
            let image = CMatrix::from_vectorized(&s.mul_vec(&unit.vectorize())?, d)?;
            for k in 0..d {
                for l in 0..d {
                    choi[(i * d + k, j * d + l)] = image[(k, l)];
                }
            }
        }
    }
    let scale = choi.max_norm().max(1.0);
    if choi.hermitian_residual() > tol.povm * scale {
        return Ok(false);
    }
    psd_check(&choi, tol.psd * scale, tol.povm * scale)
}

/// Table of candidate joint effects, indexed by (A-outcome, B-outcome).
#[derive(Debug, Clone)]
pub struct JointEffectTable {
    table: Vec<Vec<CMatrix>>,
}

impl JointEffectTable {
    pub fn new(table: Vec<Vec<CMatrix>>) -> JointEffectTable {
        JointEffectTable { table }
    }

    /// The standard product table `C(x, y) = E_A(x) E_B(y)` (a valid joint
    /// observable exactly when the effects commute).
    pub fn product(a: &Povm, b: &Povm) -> Result<JointEffectTable> {
        let mut table = Vec::with_capacity(a.len());
        for x in 0..a.len() {
            let mut row = Vec::with_capacity(b.len());
            for y in 0..b.len() {
                row.push(a.effect(x).mul(b.effect(y))?);
            }
            table.push(row);
        }
        Ok(JointEffectTable { table })
    }

    pub fn entry(&self, x: usize, y: usize) -> &CMatrix {
        &self.table[x][y]
    }
}

/// Verdict of a POVM compatibility verification.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatVerdict {
    pub compatible: bool,
    pub max_residual: f64,
}

/// Verify that a joint effect table establishes compatibility of two POVMs:
/// every entry must be a valid effect (Hermitian, positive) and the row and
/// column sums must reproduce the marginal POVMs.
pub fn povm_compat_verify(
    a: &Povm,
    b: &Povm,
    table: &JointEffectTable,
    tol: &Tolerances,
) -> Result<CompatVerdict> {
    if table.table.len() != a.len() || table.table.iter().any(|row| row.len() != b.len()) {
        return Err(CmmError::Input(format!(
            "joint table must be {} x {}",
            a.len(),
            b.len()
        )));
    }
    let dim = a.dim();
    let mut max_residual = 0.0_f64;
    let mut compatible = true;
    for row in &table.table {
        for c in row {
            if c.rows() != dim || c.cols() != dim {
                return Err(CmmError::Input("joint effect with wrong shape".into()));
            }
            let herm = c.hermitian_residual();
            if herm > tol.povm {
                compatible = false;
                max_residual = max_residual.max(herm);
                continue;
            }
            if !psd_check(c, tol.psd, tol.povm)? {
                compatible = false;
            }
        }
    }
    for x in 0..a.len() {
        let mut sum = CMatrix::zeros(dim, dim);
        for y in 0..b.len() {
            sum = sum.add(table.entry(x, y))?;
        }
        let res = sum.sub(a.effect(x))?.max_norm();
        max_residual = max_residual.max(res);
        if res > tol.povm {
            compatible = false;
        }
    }
    for y in 0..b.len() {
        let mut sum = CMatrix::zeros(dim, dim);
        for x in 0..a.len() {
            sum = sum.add(table.entry(x, y))?;
        }
        let res = sum.sub(b.effect(y))?.max_norm();
        max_residual = max_residual.max(res);
        if res > tol.povm {
            compatible = false;
        }
    }
    Ok(CompatVerdict {
        compatible,
        max_residual,
    })
}

/// Joint distribution `P(x, y) = Tr(C(x, y) rho)` of a verified joint
/// effect table.
pub fn joint_distribution(table: &JointEffectTable, rho: &DensityMatrix) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(table.table.len());
    for row in &table.table {
        let mut r = Vec::with_capacity(row.len());
        for c in row {
            r.push(c.mul(rho.matrix())?.trace()?.re);
        }
        out.push(r);
    }
    Ok(out)
}
