//! Hermitian eigendecomposition by cyclic Jacobi rotations, with eigenvalue
//! clustering into eigenspace projectors.
//!
//! A complex off-diagonal entry is first rotated onto the real axis by a
//! diagonal phase, then annihilated by the usual real Jacobi rotation. The
//! accumulated unitary keeps the eigenvectors orthonormal to machine
//! precision, which is what the projector-algebra invariants lean on.

use super::{CMatrix, C64};
use crate::error::{CmmError, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues clustered into groups, one orthogonal projector per group.
///
/// Projectors are Hermitian, idempotent, mutually orthogonal, and sum to the
/// identity; `sum_k eigenvalue_k * projector_k` reconstructs the input.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
}

impl SpectralDecomposition {
    /// Distinct (clustered) eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Projector onto the eigenspace of the k-th clustered eigenvalue.
    pub fn projector(&self, k: usize) -> &CMatrix {
        &self.projectors[k]
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `sum_k f(eigenvalue_k) * projector_k`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.projectors[0].rows();
        let mut out = CMatrix::zeros(n, n);
        for (x, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out = out.add(&p.scale(C64::new(f(*x), 0.0))).expect("same shape");
        }
        out
    }

    /// Reconstruction of the decomposed operator.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|x| x)
    }
}

/// Raw Jacobi eigensolver: eigenvalues ascending plus the matching
/// orthonormal eigenvectors as columns. Input must be square; Hermiticity is
/// the caller's responsibility.
pub(crate) fn jacobi_eig(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.rows();
    let mut a = m.clone();
    let mut q = CMatrix::identity(n);
    let scale = a.max_norm().max(f64::MIN_POSITIVE);
    let stop = scale * 1e-15 * (n as f64);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..n {
            for qq in (p + 1)..n {
                off = off.max(a[(p, qq)].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                rotate(&mut a, &mut q, p, r, stop);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| q[(i, order[j])]);
    (eigenvalues, vectors)
}

/// Annihilate the (p, r) off-diagonal entry with a unitary plane rotation.
fn rotate(a: &mut CMatrix, q: &mut CMatrix, p: usize, r: usize, skip: f64) {
    let apr = a[(p, r)];
    let b = apr.norm();
    if b <= skip {
        return;
    }
    let n = a.rows();
    let phase = apr / b;
    let app = a[(p, p)].re;
    let arr = a[(r, r)].re;
    // Annihilation condition for this column layout: t^2 - 2*tau*t - 1 = 0,
    // taking the smaller-magnitude root for stability.
    let tau = (arr - app) / (2.0 * b);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Columns of the rotation: col p = (c, s*conj(phase)), col r = (-s, c*conj(phase)).
    let cp = C64::new(c, 0.0);
    let sp = phase.conj() * s;
    let cq = phase.conj() * c;
    let sn = C64::new(-s, 0.0);

    for k in 0..n {
        if k == p || k == r {
            continue;
        }
        let akp = a[(k, p)];
        let akr = a[(k, r)];
        a[(k, p)] = akp * cp + akr * sp;
        a[(k, r)] = akp * sn + akr * cq;
        a[(p, k)] = a[(k, p)].conj();
        a[(r, k)] = a[(k, r)].conj();
    }
    let new_pp = c * c * app + 2.0 * c * s * b + s * s * arr;
    let new_rr = s * s * app - 2.0 * c * s * b + c * c * arr;
    a[(p, p)] = C64::new(new_pp, 0.0);
    a[(r, r)] = C64::new(new_rr, 0.0);
    a[(p, r)] = C64::new(0.0, 0.0);
    a[(r, p)] = C64::new(0.0, 0.0);

    for k in 0..n {
        let qkp = q[(k, p)];
        let qkr = q[(k, r)];
        q[(k, p)] = qkp * cp + qkr * sp;
        q[(k, r)] = qkp * sn + qkr * cq;
    }
}

/// Spectral decomposition of a Hermitian matrix with eigenvalue clustering.
///
/// Eigenvalues closer than `cluster_tol` times the spectral radius are merged
/// into a single outcome, so degenerate spectra yield eigenspace projectors
/// of the right rank rather than arbitrary unit-rank factors.
///
/// Rejects input whose max-norm Hermiticity residual exceeds `hermitian_tol`.
pub fn hermitian_eig(
    m: &CMatrix,
    cluster_tol: f64,
    hermitian_tol: f64,
) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(CmmError::Shape(format!(
            "eigendecomposition of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let residual = m.hermitian_residual();
    if residual > hermitian_tol {
        return Err(CmmError::Domain(format!(
            "matrix is not Hermitian (residual {residual:.3e} > {hermitian_tol:.3e})"
        )));
    }
    let (values, vectors) = jacobi_eig(m);
    let n = values.len();
    let radius = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let gap = cluster_tol * radius;

    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= gap {
            end += 1;
        }
        let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        let mut proj = CMatrix::zeros(n, n);
        for col in start..end {
            let v: Vec<C64> = (0..n).map(|i| vectors[(i, col)]).collect();
            proj = proj.add(&CMatrix::outer(&v)).expect("same shape");
        }
        eigenvalues.push(mean);
        projectors.push(proj);
        start = end;
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
    })
}

/// Positive-semidefiniteness test: smallest eigenvalue >= -tol.
///
/// The input must be Hermitian within `hermitian_tol`.
pub fn psd_check(m: &CMatrix, tol: f64, hermitian_tol: f64) -> Result<bool> {
    if !m.is_square() {
        return Err(CmmError::Shape("PSD test on non-square matrix".into()));
    }
    let residual = m.hermitian_residual();
    if residual > hermitian_tol {
        return Err(CmmError::Domain(format!(
            "PSD test on non-Hermitian matrix (residual {residual:.3e})"
        )));
    }
    let (values, _) = jacobi_eig(m);
    Ok(values.first().is_none_or(|&lo| lo >= -tol))
}
