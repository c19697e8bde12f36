//! Dense complex linear algebra on the truncated Hilbert space.
//!
//! States and matrices are plain `nalgebra` dynamic types over [`C64`]. The
//! two operator classes with invariants, [`HermitianOperator`] and
//! [`UnitaryOperator`], are newtypes whose constructors check them.

mod eigen;
mod unitary;

pub use eigen::{expm_i_hermitian, hermitian_eig, EigenSystem};
pub use unitary::{polar_unitarize, unitary_eigenphases, UnitarySpectrum};

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex64;
pub type ComplexVector = DVector<C64>;
pub type ComplexMatrix = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn basis_vector(dim: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(-1., 0.)])
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r + 0.0
    }
}

/// Distance between `a` and `b` on a circle of circumference `period`.
pub fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

pub fn is_finite_matrix(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite_vector(v: &ComplexVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Relative Frobenius Hermiticity defect `‖M − M†‖_F / ‖M‖_F` (0 for the zero matrix).
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / scale
}

/// `‖M†M − Id‖_F`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - ComplexMatrix::identity(n, n)).norm()
}

/// Self-adjoint operator with a checked Hermiticity invariant.
///
/// The stored matrix is exactly symmetrized, `(M + M†)/2`, after the check.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::DEFAULT.hermiticity)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("empty operator".into()));
        }
        if !is_finite_matrix(&matrix) {
            return Err(Error::NonFinite { what: "Hermitian operator" });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > tol {
            return Err(Error::NonHermitianInput { defect });
        }
        let sym = (&matrix + matrix.adjoint()).scale(0.5);
        Ok(Self { matrix: sym })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let v = ComplexVector::from_iterator(diag.len(), diag.iter().map(|&d| c64(d, 0.0)));
        Self::new(ComplexMatrix::from_diagonal(&v))
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale(s) }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { matrix: &self.matrix + other.matrix.scale(s) })
    }

    /// Largest eigenvalue modulus.
    pub fn operator_norm(&self) -> Result<f64> {
        let eig = hermitian_eig(self)?;
        Ok(eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    /// `⟨ψ, Hψ⟩` as a complex number; the imaginary part is rounding noise.
    pub fn expectation(&self, psi: &ComplexVector) -> C64 {
        psi.dotc(&(&self.matrix * psi))
    }

    pub fn apply(&self, psi: &ComplexVector) -> ComplexVector {
        &self.matrix * psi
    }
}

/// Unitary operator carrying its measured unitarity defect.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
    unitarity_defect: f64,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::DEFAULT.unitarity)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if !is_finite_matrix(&matrix) {
            return Err(Error::NonFinite { what: "unitary operator" });
        }
        let defect = unitarity_defect(&matrix);
        if defect > tol {
            return Err(Error::NonUnitaryInput { defect });
        }
        Ok(Self { matrix, unitarity_defect: defect })
    }

    /// Wraps a matrix known to be unitary by construction (closed forms,
    /// diagonal phases), measuring but not enforcing the defect.
    pub(crate) fn from_parts(matrix: ComplexMatrix) -> Self {
        let unitarity_defect = unitarity_defect(&matrix);
        Self { matrix, unitarity_defect }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: identity(dim), unitarity_defect: 0.0 }
    }

    /// `diag(e^{iθ_k})`.
    pub fn diagonal_phases(phases: &[f64]) -> Self {
        let d = ComplexVector::from_iterator(phases.len(), phases.iter().map(|&p| cis(p)));
        Self::from_parts(ComplexMatrix::from_diagonal(&d))
    }

    pub fn block_diagonal(blocks: &[UnitaryOperator]) -> Self {
        let dim: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut m = ComplexMatrix::zeros(dim, dim);
        let mut offset = 0;
        for b in blocks {
            let d = b.dim();
            m.view_mut((offset, offset), (d, d)).copy_from(&b.matrix);
            offset += d;
        }
        Self::from_parts(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.unitarity_defect
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), unitarity_defect: self.unitarity_defect }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_parts(&self.matrix * &other.matrix)
    }

    pub fn apply(&self, psi: &ComplexVector) -> ComplexVector {
        &self.matrix * psi
    }

    /// Frobenius distance to another operator.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}
