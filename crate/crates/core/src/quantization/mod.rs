//! Quantum side: the spaces `H_k` of holomorphic sections of `O(k - 1)`,
//! Toeplitz operators, the fine operators `Op_k`, and matrix norms.
//!
//! All matrices are written in the orthonormal monomial basis
//! `e_j = c_j z^j`, `c_j^2 = (m + 1) binom(m, j) / 2pi`, `m = k - 1`, for the
//! fibre metric `(1 + |z|^2)^{-m}` and the measure `omega`. The basis
//! diagonalizes rotations about the `u`-axis.

pub mod linalg;
mod toeplitz;

use std::fmt;
use std::ops::{Add, Mul, Sub};

use rustfft::num_complex::Complex64;

pub use linalg::{
    adjoint_matmul, commutator, exp_i_hermitian, exp_i_hermitian_fast, frobenius_norm, matmul, op_norm, polar_unitary, projective_distance,
    projective_distance_frobenius, schatten_norm, singular_values, trace, unitarity_defect,
    CMatrix,
};
pub use toeplitz::{
    bracket_defect, gram_matrix, op_fine, quantize, required_nodes, roundoff, toeplitz,
    toeplitz_with_nodes, Quantizer,
};

use crate::error::{Error, Result};

/// Semiclassical level `k`: `dim H_k = k`, `hbar = 1/k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantizationLevel {
    pub k: usize,
    /// Degree of the line bundle, `k - 1`.
    pub m: usize,
    pub dim: usize,
}

impl QuantizationLevel {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Input("level k must be positive".to_string()));
        }
        Ok(Self { k, m: k - 1, dim: k })
    }

    pub fn hbar(&self) -> f64 {
        1.0 / self.k as f64
    }
}

impl fmt::Display for QuantizationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k = {}", self.k)
    }
}

/// Dense Hermitian operator on `H_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    level: QuantizationLevel,
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Wraps `matrix`, checking its shape and Hermiticity (`1e-12` entrywise,
    /// relative to the largest entry).
    pub fn new(level: QuantizationLevel, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != level.dim || matrix.ncols() != level.dim {
            return Err(Error::Input(format!(
                "{}x{} matrix for a level of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                level.dim
            )));
        }
        let scale = matrix.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > 1e-12 * scale {
            return Err(Error::Input(format!("matrix is not Hermitian (defect {defect:.3e})")));
        }
        Ok(Self { level, matrix })
    }

    pub(crate) fn from_parts(level: QuantizationLevel, matrix: CMatrix) -> Self {
        Self { level, matrix }
    }

    pub fn identity(level: QuantizationLevel) -> Self {
        Self::from_parts(level, CMatrix::identity(level.dim, level.dim))
    }

    pub fn level(&self) -> QuantizationLevel {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.level.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn op_norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        schatten_norm(&self.matrix, p)
    }

    pub fn trace(&self) -> Complex64 {
        trace(&self.matrix)
    }

    pub fn commutator(&self, other: &Self) -> Result<CMatrix> {
        self.check_level(other)?;
        Ok(commutator(&self.matrix, &other.matrix))
    }

    fn check_level(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level.k, other.level.k));
        }
        Ok(())
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.level, rhs.level, "operators on different levels");
        HermitianOperator::from_parts(self.level, &self.matrix + &rhs.matrix)
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;

    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.level, rhs.level, "operators on different levels");
        HermitianOperator::from_parts(self.level, &self.matrix - &rhs.matrix)
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;

    fn mul(self, s: f64) -> HermitianOperator {
        HermitianOperator::from_parts(self.level, &self.matrix * Complex64::new(s, 0.0))
    }
}

/// How a propagator was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorMeta {
    pub path: String,
    /// Time steps of the finest integration (1 for exact exponentials).
    pub steps: usize,
    /// Estimated operator-norm error of the matrix.
    pub error_estimate: f64,
}

/// Dense unitary on `H_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryPropagator {
    pub level: QuantizationLevel,
    pub matrix: CMatrix,
    pub meta: PropagatorMeta,
}

impl UnitaryPropagator {
    pub fn identity(level: QuantizationLevel, path: &str) -> Self {
        Self {
            level,
            matrix: CMatrix::identity(level.dim, level.dim),
            meta: PropagatorMeta {
                path: path.to_string(),
                steps: 0,
                error_estimate: 0.0,
            },
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    pub fn inverse(&self) -> Self {
        Self {
            level: self.level,
            matrix: self.matrix.adjoint(),
            meta: self.meta.clone(),
        }
    }

    /// `self * other`, with error estimates added.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level.k, other.level.k));
        }
        Ok(Self {
            level: self.level,
            matrix: matmul(&self.matrix, &other.matrix),
            meta: PropagatorMeta {
                path: format!("{} * {}", self.meta.path, other.meta.path),
                steps: self.meta.steps.max(other.meta.steps),
                error_estimate: self.meta.error_estimate + other.meta.error_estimate,
            },
        })
    }

    /// `U A U*`.
    pub fn conjugate(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if self.level != a.level {
            return Err(Error::LevelMismatch(self.level.k, a.level.k));
        }
        Ok(HermitianOperator::from_parts(
            self.level,
            matmul(&matmul(&self.matrix, a.matrix()), &self.matrix.adjoint()),
        ))
    }

    /// `delta_p([U], [V]) = inf_theta ||U - e^{i theta} V||_p`.
    pub fn projective_distance(&self, other: &Self, p: f64) -> Result<f64> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level.k, other.level.k));
        }
        projective_distance(&self.matrix, &other.matrix, p)
    }
}
