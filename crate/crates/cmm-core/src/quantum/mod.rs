//! Density-matrix backends: projective (Lüders) measurement and general
//! quantum instruments.
//!
//! Contexts are density operators, observables are Hermitian operators (or
//! the POVMs induced by instruments), and instruments update states by
//! outcome-indexed positive superoperators.

mod instrument;
mod model;
mod search;

pub use instrument::{
    cp_check, joint_distribution, povm_compat_verify, povm_from_instrument, CompatVerdict,
    CpReport, Instrument, InstrumentKind, InstrumentOutput, JointEffectTable, Povm,
};
pub use model::{quantum_interference, QuantumInterference, QuantumModel};
pub use search::{
    bell_operator, chsh_maximize, evaluate_witness, pair_model, search_oe_rre, ChshSearch,
    ChshWitness, OeRreSearch, OeRreWitness,
};

use crate::error::{CmmError, Result};
use crate::linalg::{hermitian_eig, psd_check, CMatrix, SpectralDecomposition, C64};
use crate::sampler::CounterRng;
use crate::tolerance::Tolerances;

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate and wrap a matrix as a state.
    pub fn new(mat: CMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
        if !mat.is_square() {
            return Err(CmmError::Shape("density matrix must be square".into()));
        }
        let herm = mat.hermitian_residual();
        if herm > tol.state {
            return Err(CmmError::invariant("state is Hermitian", herm));
        }
        let trace = mat.trace()?;
        let trace_residual = (trace.re - 1.0).abs().max(trace.im.abs());
        if trace_residual > tol.state {
            return Err(CmmError::invariant("trace = 1", trace_residual));
        }
        if !psd_check(&mat, tol.psd, tol.state.max(tol.hermitian))? {
            return Err(CmmError::invariant("state is positive semidefinite", 0.0));
        }
        Ok(DensityMatrix { mat })
    }

    /// Pure state from (not necessarily normalized) amplitudes.
    pub fn from_pure(amplitudes: &[C64]) -> Result<DensityMatrix> {
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(CmmError::Input(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let scale = 1.0 / norm2.sqrt();
        let normalized: Vec<C64> = amplitudes.iter().map(|&z| z * scale).collect();
        Ok(DensityMatrix {
            mat: CMatrix::outer(&normalized),
        })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> DensityMatrix {
        DensityMatrix {
            mat: CMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// Wrap without validation; for matrices produced by operations that
    /// preserve the state invariants by construction.
    pub(crate) fn trusted(mat: CMatrix) -> DensityMatrix {
        DensityMatrix { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Convex mixture of two states.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        if self.dim() != other.dim() {
            return Err(CmmError::Shape(
                "mixing states of different dimension".into(),
            ));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(CmmError::Input(format!(
                "mixture weight {p} outside [0, 1]"
            )));
        }
        let mat = self
            .mat
            .scale(C64::new(p, 0.0))
            .add(&other.mat.scale(C64::new(1.0 - p, 0.0)))?;
        Ok(DensityMatrix { mat })
    }

    /// Max-norm distance between matrices, used for fixed-point checks.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        self.mat
            .sub(&other.mat)
            .map(|d| d.max_norm())
            .unwrap_or(f64::INFINITY)
    }
}

/// Hermitian observable with its clustered spectral decomposition. Outcomes
/// are the distinct (clustered) eigenvalues, ascending.
#[derive(Debug, Clone)]
pub struct HermitianObservable {
    name: String,
    matrix: CMatrix,
    spectral: SpectralDecomposition,
}

impl HermitianObservable {
    pub fn new(
        name: impl Into<String>,
        matrix: CMatrix,
        tol: &Tolerances,
    ) -> Result<HermitianObservable> {
        let spectral = hermitian_eig(&matrix, tol.cluster_rel, tol.hermitian)?;
        Ok(HermitianObservable {
            name: name.into(),
            matrix,
            spectral,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn outcomes(&self) -> &[f64] {
        self.spectral.eigenvalues()
    }

    pub fn projector(&self, outcome: usize) -> &CMatrix {
        self.spectral.projector(outcome)
    }
}

/// Born probability of the given outcome: `Tr(E_A(x) rho)`, clamped into
/// [0, 1] against round-off.
pub fn born_prob(rho: &DensityMatrix, a: &HermitianObservable, outcome: usize) -> Result<f64> {
    if outcome >= a.outcomes().len() {
        return Err(CmmError::Lookup(format!(
            "outcome index {outcome} out of range for observable {}",
            a.name()
        )));
    }
    let p = a.projector(outcome).mul(rho.matrix())?.trace()?.re;
    Ok(p.clamp(0.0, 1.0))
}

/// Lüders (projection) update
/// `rho -> E(x) rho E(x) / Tr(E(x) rho E(x))`.
pub fn luders_update(
    rho: &DensityMatrix,
    a: &HermitianObservable,
    outcome: usize,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    let p = born_prob(rho, a, outcome)?;
    if p <= tol.eps_cond {
        return Err(CmmError::Conditioning {
            context: format!("state(dim={})", rho.dim()),
            observable: a.name().to_string(),
            outcome: format!("{}", a.outcomes()[outcome]),
        });
    }
    let e = a.projector(outcome);
    let updated = e.mul(rho.matrix())?.mul(e)?.scale(C64::new(1.0 / p, 0.0));
    Ok(DensityMatrix::trusted(updated))
}

/// Spectral calculus: the observable `f(A) = sum f(x) E_A(x)`, with outcomes
/// that map to the same value merged.
pub fn function_of_observable(
    a: &HermitianObservable,
    name: impl Into<String>,
    f: impl Fn(f64) -> f64,
    tol: &Tolerances,
) -> Result<HermitianObservable> {
    let matrix = a.spectral().apply_function(&f);
    HermitianObservable::new(name, matrix, tol)
}

/// Seeded random generators used by fixtures and searches. Everything is
/// driven by the crate's own counter generator so results are reproducible
/// across platforms.
pub mod random {
    use super::*;

    /// Haar-style random pure state (normalized complex Gaussian vector).
    pub fn pure_state(dim: usize, rng: &mut CounterRng) -> DensityMatrix {
        let amps: Vec<C64> = (0..dim)
            .map(|_| {
                let (re, im) = rng.next_gaussian_pair();
                C64::new(re, im)
            })
            .collect();
        DensityMatrix::from_pure(&amps).expect("gaussian vector has positive norm")
    }

    /// Amplitudes of a random pure state.
    pub fn pure_state_vector(dim: usize, rng: &mut CounterRng) -> Vec<C64> {
        let amps: Vec<C64> = (0..dim)
            .map(|_| {
                let (re, im) = rng.next_gaussian_pair();
                C64::new(re, im)
            })
            .collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        amps.into_iter().map(|z| z / norm).collect()
    }

    /// Full-rank random mixed state `G G^dagger / Tr`.
    pub fn mixed_state(dim: usize, rng: &mut CounterRng) -> DensityMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            let (re, im) = rng.next_gaussian_pair();
            C64::new(re, im)
        });
        let gg = g.mul(&g.adjoint()).expect("square");
        let trace = gg.trace().expect("square").re;
        DensityMatrix::trusted(gg.scale(C64::new(1.0 / trace, 0.0)))
    }

    /// Random Hermitian matrix with Gaussian entries.
    pub fn hermitian(dim: usize, rng: &mut CounterRng) -> CMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            let (re, im) = rng.next_gaussian_pair();
            C64::new(re, im)
        });
        g.add(&g.adjoint())
            .expect("square")
            .scale(C64::new(0.5, 0.0))
    }

    /// Random unitary: Gram-Schmidt orthonormalization of a Gaussian matrix.
    pub fn unitary(dim: usize, rng: &mut CounterRng) -> CMatrix {
        loop {
            let g = CMatrix::from_fn(dim, dim, |_, _| {
                let (re, im) = rng.next_gaussian_pair();
                C64::new(re, im)
            });
            if let Some(u) = gram_schmidt(&g) {
                return u;
            }
        }
    }

    fn gram_schmidt(g: &CMatrix) -> Option<CMatrix> {
        let n = g.rows();
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v: Vec<C64> = (0..n).map(|i| g[(i, j)]).collect();
            for u in &cols {
                let inner: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= inner * ui;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                return None;
            }
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            cols.push(v);
        }
        Some(CMatrix::from_fn(n, n, |i, j| cols[j][i]))
    }

    /// Random unit Bloch vector.
    pub fn bloch_vector(rng: &mut CounterRng) -> [f64; 3] {
        loop {
            let (x, y) = rng.next_gaussian_pair();
            let z = rng.next_gaussian();
            let n = (x * x + y * y + z * z).sqrt();
            if n > 1e-9 {
                return [x / n, y / n, z / n];
            }
        }
    }
}
