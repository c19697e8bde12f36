//! Monodromy spectra, the truncated quasienergy operator and the identities
//! linking them.

mod quasienergy;

pub use quasienergy::{
    correspondence_check, fourier_coefficients, prop34_synthesis, quasienergy_block, releq_check, CorrespondenceReport,
    MatchedPair, Prop34Synthesis, QuasienergyBlock, QuasienergySpectrum,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cis, unitary_eigenphases, ComplexMatrix, ComplexVector, UnitaryOperator};
use crate::tolerance::Tolerances;

/// Eigenpairs `U_F ξ_j = e^{−iα_j} ξ_j`, phases ascending in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSpectrum {
    pub phases: Vec<f64>,
    pub vectors: ComplexMatrix,
    pub residuals: Vec<f64>,
    pub clusters: Vec<Vec<usize>>,
}

impl FloquetSpectrum {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn vector(&self, j: usize) -> ComplexVector {
        self.vectors.column(j).into_owned()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m: f64, r| m.max(*r))
    }

    /// Quasienergies `α_j / T`.
    pub fn quasienergies(&self, period: f64) -> Vec<f64> {
        self.phases.iter().map(|a| a / period).collect()
    }
}

pub fn floquet_spectrum(floquet: &UnitaryOperator) -> Result<FloquetSpectrum> {
    if floquet.unitarity_defect() > Tolerances::DEFAULT.unitarity {
        return Err(Error::NonUnitaryInput { defect: floquet.unitarity_defect() });
    }
    let spec = unitary_eigenphases(floquet)?;
    let residuals: Vec<f64> = (0..spec.phases.len())
        .map(|j| {
            let v = spec.vectors.column(j);
            (floquet.matrix() * v - v * cis(-spec.phases[j])).norm()
        })
        .collect();
    if residuals.iter().any(|&r| r > Tolerances::DEFAULT.eigen_residual) {
        return Err(Error::ConvergenceFailure { dim: floquet.dim() });
    }
    Ok(FloquetSpectrum { phases: spec.phases, vectors: spec.vectors, residuals, clusters: spec.clusters })
}

/// Coefficients `c_j = ⟨ξ_j, ψ⟩` in the Floquet eigenbasis.
pub fn expand_in_floquet_basis(psi: &ComplexVector, spec: &FloquetSpectrum) -> Result<ComplexVector> {
    let d = spec.vectors.nrows();
    if psi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi.len() });
    }
    let ortho = (spec.vectors.adjoint() * &spec.vectors - ComplexMatrix::identity(spec.dim(), spec.dim())).norm();
    if spec.dim() < d || ortho > 1e-10 {
        return Err(Error::IncompleteBasis { dim: d, found: spec.dim() });
    }
    Ok(spec.vectors.adjoint() * psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeRegularity {
    pub points: usize,
    pub max_derivative: f64,
    pub refined_max_derivative: f64,
    /// Relative change below 10% under 2× refinement.
    pub grid_stable: bool,
}

fn max_centered_derivative(samples: &[ComplexVector], h: f64) -> f64 {
    let n = samples.len();
    (0..n)
        .map(|k| (&samples[(k + 1) % n] - &samples[(k + n - 1) % n]).norm() / (2.0 * h))
        .fold(0.0, f64::max)
}

/// Largest centred-difference derivative of a `period`-periodic function
/// sampled at `points` and `2·points` equispaced times.
pub fn mode_regularity<F>(f: F, period: f64, points: usize) -> Result<ModeRegularity>
where
    F: Fn(f64) -> Result<ComplexVector>,
{
    if points < 64 {
        return Err(Error::GridTooCoarse(format!("{points} points per period, need at least 64")));
    }
    let sweep = |n: usize| -> Result<f64> {
        let h = period / n as f64;
        let samples = (0..n).map(|k| f(k as f64 * h)).collect::<Result<Vec<_>>>()?;
        Ok(max_centered_derivative(&samples, h))
    };
    let coarse = sweep(points)?;
    let fine = sweep(2 * points)?;
    let scale = coarse.max(fine);
    let grid_stable = scale == 0.0 || (coarse - fine).abs() < 0.1 * scale;
    Ok(ModeRegularity { points, max_derivative: coarse, refined_max_derivative: fine, grid_stable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c64, expm_i_hermitian, HermitianOperator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    #[test]
    fn diagonal_monodromy() {
        let e = [0.3, 1.1, 2.9];
        let t = 1.7;
        let u = expm_i_hermitian(&HermitianOperator::from_real_diagonal(&e).unwrap(), t).unwrap();
        let spec = floquet_spectrum(&u).unwrap();
        let mut expect: Vec<f64> = e.iter().map(|x| (x * t).rem_euclid(TAU)).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in spec.phases.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn u1_phases() {
        let u = UnitaryOperator::diagonal_phases(&[PI / 3.0, -PI / 3.0]);
        let spec = floquet_spectrum(&u).unwrap();
        assert!((spec.phases[0] - PI / 3.0).abs() < 1e-12);
        assert!((spec.phases[1] - (TAU - PI / 3.0)).abs() < 1e-12);
        assert!(spec.max_residual() < 1e-12);
    }

    #[test]
    fn expansion_examples_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = ComplexMatrix::from_fn(5, 5, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let h = HermitianOperator::new((&h + h.adjoint()).scale(0.5)).unwrap();
        let spec = floquet_spectrum(&expm_i_hermitian(&h, 0.8).unwrap()).unwrap();
        let c = expand_in_floquet_basis(&spec.vector(0), &spec).unwrap();
        assert!((c - basis_vector(5, 0)).norm() < 1e-12);
        let pair = (spec.vector(0) + spec.vector(1)).scale(FRAC_1_SQRT_2);
        let c = expand_in_floquet_basis(&pair, &spec).unwrap();
        assert!((c[0] - c64(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12 && (c[1] - c64(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        for _ in 0..1000 {
            let psi = ComplexVector::from_fn(5, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let c = expand_in_floquet_basis(&psi, &spec).unwrap();
            assert!((c.norm_squared() - psi.norm_squared()).abs() <= 1e-10);
            assert!((&spec.vectors * c - &psi).norm() <= 1e-10);
        }
    }

    #[test]
    fn incomplete_basis_rejected() {
        let spec = floquet_spectrum(&UnitaryOperator::identity(3)).unwrap();
        let partial = FloquetSpectrum {
            phases: spec.phases[..2].to_vec(),
            vectors: spec.vectors.columns(0, 2).into_owned(),
            residuals: spec.residuals[..2].to_vec(),
            clusters: vec![vec![0, 1]],
        };
        assert!(matches!(
            expand_in_floquet_basis(&basis_vector(3, 0), &partial),
            Err(Error::IncompleteBasis { .. })
        ));
    }

    #[test]
    fn regularity_examples() {
        let xi = basis_vector(2, 0) * c64(0.6, 0.0) + basis_vector(2, 1) * c64(0.0, 0.8);
        let flat = mode_regularity(|_| Ok(xi.clone()), 2.0, 64).unwrap();
        assert_eq!(flat.max_derivative, 0.0);
        assert!(flat.grid_stable);
        let lambda = 3.0;
        let period = TAU / lambda;
        let r = mode_regularity(|t| Ok(&xi * cis(lambda * t)), period, 128).unwrap();
        assert!((r.max_derivative - lambda).abs() < 0.01 * lambda);
        assert!(r.grid_stable);
        assert!(matches!(mode_regularity(|_| Ok(xi.clone()), 1.0, 32), Err(Error::GridTooCoarse(_))));
    }
}
