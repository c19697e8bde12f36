use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::SVD;

use super::{cis, hermitian_eig, wrap_phase, ComplexMatrix, ComplexVector, HermitianOperator, UnitaryOperator};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Eigenphases of a unitary in the convention `U ξ = e^{−iα} ξ`, `α ∈ [0, 2π)`.
///
/// Phases are ascending; `vectors` holds matching orthonormal columns.
/// `clusters` groups indices whose phases lie within the degeneracy gap
/// (wrapping through 0), each cluster listed in ascending index order.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitarySpectrum {
    pub phases: Vec<f64>,
    pub vectors: ComplexMatrix,
    pub clusters: Vec<Vec<usize>>,
}

impl UnitarySpectrum {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k).into_owned()
    }
}

/// Unitary polar factor `W V†` of `M = W Σ V†`.
pub fn polar_unitarize(m: &ComplexMatrix) -> Result<UnitaryOperator> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure { dim: m.nrows() })?;
    let sigma_min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(sigma_min > Tolerances::DEFAULT.min_singular_value) {
        return Err(Error::SingularInput { sigma_min });
    }
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::ConvergenceFailure { dim: m.nrows() });
    };
    Ok(UnitaryOperator::from_parts(u * v_t))
}

/// Hermitian pencil `(e^{iφ}U + e^{−iφ}U†)/2`; its eigenvalue on an
/// eigenvector with phase `α` is `cos(φ − α)`.
fn rotated_real_part(u: &ComplexMatrix, phi: f64) -> ComplexMatrix {
    let w = cis(phi);
    (u.map(|z| z * w) + u.adjoint().map(|z| z * w.conj())).scale(0.5)
}

// Separation below which two pencil eigenvalues are refined together.
const GROUP_GAP: f64 = 1e-6;

fn split_groups(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] >= GROUP_GAP {
            groups.push(start..k);
            start = k;
        }
    }
    groups
}

/// Diagonalizes the pencil at angle `phi` restricted to the columns of `basis`,
/// returning the rotated basis and pencil eigenvalues.
fn restricted_pencil(u: &ComplexMatrix, basis: &ComplexMatrix, phi: f64) -> Result<(ComplexMatrix, Vec<f64>)> {
    // Hermitian by construction; restricted blocks of near-zero pencils can
    // carry a large relative rounding defect, so symmetrize instead of checking.
    let g = basis.adjoint() * rotated_real_part(u, phi) * basis;
    let g = HermitianOperator::new((&g + g.adjoint()).scale(0.5))?;
    let eig = hermitian_eig(&g)?;
    Ok((basis * eig.vectors, eig.values))
}

fn rayleigh_phase(u: &ComplexMatrix, v: &ComplexVector) -> f64 {
    wrap_phase(-v.dotc(&(u * v)).arg())
}

/// Eigendecomposition of a unitary through Hermitian pencils.
///
/// The pencil at φ = 0 separates phases by cosine. Groups that collide there
/// (α and −α, or near-equal phases) are refined by the φ = π/2 pencil, which
/// splits the two sine branches. Anything still grouped lies on one short arc
/// and is resolved by a pencil centred on that arc, where the eigenvalue is
/// locally linear in α.
pub fn unitary_eigenphases(u: &UnitaryOperator) -> Result<UnitarySpectrum> {
    let m = u.matrix();
    let dim = u.dim();
    let mut columns: Vec<ComplexVector> = Vec::with_capacity(dim);

    let (level1, values1) = restricted_pencil(m, &ComplexMatrix::identity(dim, dim), 0.0)?;
    for g1 in split_groups(&values1) {
        let b1 = level1.columns(g1.start, g1.len()).into_owned();
        if g1.len() == 1 {
            columns.push(b1.column(0).into_owned());
            continue;
        }
        let (level2, values2) = restricted_pencil(m, &b1, FRAC_PI_2)?;
        for g2 in split_groups(&values2) {
            let b2 = level2.columns(g2.start, g2.len()).into_owned();
            if g2.len() == 1 {
                columns.push(b2.column(0).into_owned());
                continue;
            }
            let trace = (b2.adjoint() * m * &b2).trace();
            let centre = -trace.arg();
            let (level3, _) = restricted_pencil(m, &b2, centre + FRAC_PI_2)?;
            columns.extend(level3.column_iter().map(|c| c.into_owned()));
        }
    }

    let mut pairs: Vec<(f64, ComplexVector)> = columns
        .into_iter()
        .map(|v| (rayleigh_phase(m, &v), v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let phases: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = ComplexMatrix::zeros(dim, dim);
    for (k, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(k, v);
    }
    let clusters = cluster_phases(&phases, Tolerances::DEFAULT.phase_cluster_gap);
    Ok(UnitarySpectrum { phases, vectors, clusters })
}

/// Groups sorted phases whose consecutive gap is below `gap`, merging the
/// first and last groups across the 2π wrap.
pub(crate) fn cluster_phases(phases: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, &p) in phases.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if p - phases[*c.last().unwrap()] < gap => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    if clusters.len() > 1 {
        let first = phases[clusters[0][0]];
        let last = phases[*clusters.last().unwrap().last().unwrap()];
        if first + TAU - last < gap {
            let tail = clusters.pop().unwrap();
            let mut merged = tail;
            merged.extend(clusters[0].iter().copied());
            merged.sort_unstable();
            clusters[0] = merged;
        }
    }
    clusters
}
