//! Dense complex-matrix kernel.
//!
//! Row-major storage, value semantics, no implicit broadcasting. The sizes
//! in scope are tiny (dim <= 64, usually 2 or 4), so everything is written
//! for clarity and numerical robustness rather than throughput.

mod eig;

pub(crate) use eig::jacobi_eig;
pub use eig::{hermitian_eig, psd_check, SpectralDecomposition};

use crate::error::{CmmError, Result};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Index, IndexMut};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl CMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> CMatrix {
        CMatrix {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity of dimension `n`.
    pub fn identity(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> CMatrix {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from nested rows, validating shape and finiteness.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<CMatrix> {
        let r = rows.len();
        if r == 0 {
            return Err(CmmError::Shape("matrix with zero rows".into()));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(CmmError::Shape("matrix with zero columns".into()));
        }
        if r > MAX_DIM || c > MAX_DIM {
            return Err(CmmError::Shape(format!(
                "matrix {r}x{c} exceeds supported dimension {MAX_DIM}"
            )));
        }
        let mut entries = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(CmmError::Shape(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            for z in row {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(CmmError::Input(format!("non-finite entry in row {i}")));
                }
                entries.push(*z);
            }
        }
        Ok(CMatrix {
            rows: r,
            cols: c,
            entries,
        })
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> CMatrix {
        let n = values.len();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Column vector as an n x 1 matrix.
    pub fn column(v: &[C64]) -> CMatrix {
        CMatrix::from_fn(v.len(), 1, |i, _| v[i])
    }

    /// Rank-one outer product v v^dagger.
    pub fn outer(v: &[C64]) -> CMatrix {
        let n = v.len();
        CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// Elementwise sum.
    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "add")?;
        Ok(self.zip(other, |a, b| a + b))
    }

    /// Elementwise difference.
    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "sub")?;
        Ok(self.zip(other, |a, b| a - b))
    }

    /// Matrix product.
    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(CmmError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(CmmError::Shape(format!(
                "cannot apply {}x{} to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[i] += self[(i, j)] * v[j];
            }
        }
        Ok(out)
    }

    /// Scalar multiple.
    pub fn scale(&self, s: C64) -> CMatrix {
        self.map(|z| z * s)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Transpose without conjugation.
    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> CMatrix {
        self.map(|z| z.conj())
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(CmmError::Shape(format!(
                "trace of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    /// Kronecker product.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        CMatrix::from_fn(r1 * r2, c1 * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm Hermiticity residual, `max_ij |m_ij - conj(m_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let r = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// True when the Hermiticity residual is within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// Column-stacked vectorization: `vec(m)[i + j*rows] = m[i][j]`.
    pub fn vectorize(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    /// Inverse of [`CMatrix::vectorize`] for square matrices.
    pub fn from_vectorized(v: &[C64], dim: usize) -> Result<CMatrix> {
        if v.len() != dim * dim {
            return Err(CmmError::Shape(format!(
                "vectorized length {} does not match dimension {dim}",
                v.len()
            )));
        }
        Ok(CMatrix::from_fn(dim, dim, |i, j| v[i + j * dim]))
    }

    fn check_same_shape(&self, other: &CMatrix, op: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CmmError::Shape(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli and related fixed matrices used by the quantum backend and tests.
pub mod fixed {
    use super::{CMatrix, C64};

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| {
            if i != j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn sigma_y() -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, -1.0);
        m[(1, 0)] = C64::new(0.0, 1.0);
        m
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::diag(&[1.0, -1.0])
    }

    /// `n . sigma` for a Bloch vector `n` (unit length not enforced).
    pub fn bloch(n: [f64; 3]) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(n[2], 0.0);
        m[(1, 1)] = C64::new(-n[2], 0.0);
        m[(0, 1)] = C64::new(n[0], -n[1]);
        m[(1, 0)] = C64::new(n[0], n[1]);
        m
    }
}
