use nalgebra::{DMatrix, SymmetricEigen};

use super::{c64, cis, ComplexMatrix, ComplexVector, HermitianOperator, UnitaryOperator};
use crate::error::{Error, Result};

/// Eigenpairs of a Hermitian operator, eigenvalues ascending.
///
/// `vectors` holds the eigenvectors as columns, in the order of `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k).into_owned()
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(v);
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(−i s H)` from the stored decomposition.
    pub fn evolution(&self, s: f64) -> UnitaryOperator {
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            let phase = cis(-s * v);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
        UnitaryOperator::from_parts(scaled * self.vectors.adjoint())
    }

    /// `exp(−i s H) ψ` without forming the full propagator.
    pub fn evolve_vector(&self, coefficients: &ComplexVector, s: f64) -> ComplexVector {
        let phased = ComplexVector::from_iterator(
            self.dim(),
            coefficients.iter().zip(&self.values).map(|(c, &v)| c * cis(-s * v)),
        );
        &self.vectors * phased
    }

    /// Coefficients of `psi` in the eigenbasis, `V† ψ`.
    pub fn coefficients(&self, psi: &ComplexVector) -> ComplexVector {
        self.vectors.adjoint() * psi
    }
}

fn iteration_cap(dim: usize) -> usize {
    100 * dim + 1000
}

/// Full eigendecomposition of a Hermitian operator.
///
/// Real symmetric input takes the real solver, which is several times faster
/// at large dimension.
pub fn hermitian_eig(h: &HermitianOperator) -> Result<EigenSystem> {
    let dim = h.dim();
    let (raw_values, raw_vectors): (Vec<f64>, ComplexMatrix) = if h.is_real() {
        let m: DMatrix<f64> = h.matrix().map(|z| z.re);
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, iteration_cap(dim))
            .ok_or(Error::ConvergenceFailure { dim })?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| c64(x, 0.0)))
    } else {
        let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, iteration_cap(dim))
            .ok_or(Error::ConvergenceFailure { dim })?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    if raw_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure { dim });
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let values = order.iter().map(|&k| raw_values[k]).collect();
    let mut vectors = ComplexMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &raw_vectors.column(src));
    }
    Ok(EigenSystem { values, vectors })
}

/// `exp(−i s H)`.
pub fn expm_i_hermitian(h: &HermitianOperator, s: f64) -> Result<UnitaryOperator> {
    if s == 0.0 {
        return Ok(UnitaryOperator::identity(h.dim()));
    }
    Ok(hermitian_eig(h)?.evolution(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, sigma_x, sigma_z, wrap_phase};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianOperator {
        let a = ComplexMatrix::from_fn(n, n, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianOperator::new((&a + a.adjoint()).scale(0.5)).unwrap()
    }

    fn overlap(a: &ComplexVector, b: &ComplexVector) -> f64 {
        a.dotc(b).norm()
    }

    #[test]
    fn diagonal_case() {
        let h = HermitianOperator::from_real_diagonal(&[2.0, 1.0]).unwrap();
        let e = hermitian_eig(&h).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0]);
        assert!((overlap(&e.vector(0), &crate::linalg::basis_vector(2, 1)) - 1.0).abs() < 1e-15);
        assert!((overlap(&e.vector(1), &crate::linalg::basis_vector(2, 0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = hermitian_eig(&HermitianOperator::new(sigma_x()).unwrap()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
        let minus = ComplexVector::from_vec(vec![c64(FRAC_1_SQRT_2, 0.), c64(-FRAC_1_SQRT_2, 0.)]);
        let plus = ComplexVector::from_vec(vec![c64(FRAC_1_SQRT_2, 0.), c64(FRAC_1_SQRT_2, 0.)]);
        assert!((overlap(&e.vector(0), &minus) - 1.0).abs() < 1e-14);
        assert!((overlap(&e.vector(1), &plus) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 8, 17, 32, 64] {
            let h = random_hermitian(&mut rng, n);
            let e = hermitian_eig(&h).unwrap();
            let rel = (e.reconstruct() - h.matrix()).norm() / h.matrix().norm();
            assert!(rel <= 1e-10, "n={n} reconstruction {rel:e}");
            let ortho = (e.vectors.adjoint() * &e.vectors - identity(n)).norm();
            assert!(ortho <= 1e-10, "n={n} orthonormality {ortho:e}");
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn expm_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(&mut rng, 4);
        let u = expm_i_hermitian(&h, 0.0).unwrap();
        assert_eq!(u.matrix(), &identity(4));
    }

    #[test]
    fn expm_of_pauli_z() {
        let u = expm_i_hermitian(&HermitianOperator::new(sigma_z()).unwrap(), PI / 2.0).unwrap();
        assert!((u.matrix()[(0, 0)] - cis(-PI / 2.0)).norm() < 1e-15);
        assert!((u.matrix()[(1, 1)] - cis(PI / 2.0)).norm() < 1e-15);
        assert!(u.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn expm_inverse_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 5, 12] {
            let h = random_hermitian(&mut rng, n);
            let s = rng.random_range(-5.0..5.0);
            let prod = expm_i_hermitian(&h, s).unwrap().compose(&expm_i_hermitian(&h, -s).unwrap());
            assert!((prod.matrix() - identity(n)).norm() <= 1e-12);
        }
    }

    #[test]
    fn expm_semigroup_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(&mut rng, 9);
        let (s1, s2) = (0.7, -2.3);
        let lhs = expm_i_hermitian(&h, s1 + s2).unwrap();
        let rhs = expm_i_hermitian(&h, s1).unwrap().compose(&expm_i_hermitian(&h, s2).unwrap());
        assert!(lhs.distance(&rhs) <= 1e-10);
        assert!(lhs.unitarity_defect() <= 1e-10);
    }

    #[test]
    fn expm_eigenphases_follow_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 6);
        let s = 1.37;
        let e = hermitian_eig(&h).unwrap();
        let u = expm_i_hermitian(&h, s).unwrap();
        let spec = crate::linalg::unitary_eigenphases(&u).unwrap();
        let mut expected: Vec<f64> = e.values.iter().map(|v| wrap_phase(s * v)).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in spec.phases.iter().zip(&expected) {
            assert!(crate::linalg::circular_distance(*a, *b, std::f64::consts::TAU) < 1e-10);
        }
    }
}
