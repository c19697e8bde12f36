//! Fourier-block truncation of `K = −i d/dt + H(t)` on one period.
//!
//! A `T`-periodic vector function `f(t) = Σ_n F_n e^{inωt}`, `|n| ≤ N`, is
//! stored as the stacked blocks `F_{−N}, …, F_N`, so block `n` occupies rows
//! `(n+N)d .. (n+N+1)d`. In this basis `K_{nm} = nω δ_{nm} + Ĥ_{n−m}`.

use std::f64::consts::TAU;

use serde::Serialize;

use super::FloquetSpectrum;
use crate::error::{Error, Result};
use crate::linalg::{
    circular_distance, cis, hermitian_eig, ComplexMatrix, ComplexVector, EigenSystem, HermitianOperator, C64,
};
use crate::models::ModelSpec;
use crate::propagator::{OrbitSample, PropagatorCache, TimeGrid};

#[derive(Debug, Clone)]
pub struct QuasienergyBlock {
    pub cutoff: usize,
    pub omega: f64,
    pub period: f64,
    /// Physical dimension `d`.
    pub dim: usize,
    pub quadrature: usize,
    /// `Ĥ_q` for `q = −2N, …, 2N`, stored at `q + 2N`.
    pub harmonics: Vec<ComplexMatrix>,
    pub matrix: HermitianOperator,
}

impl QuasienergyBlock {
    /// Total size `(2N+1)·d`.
    pub fn size(&self) -> usize {
        (2 * self.cutoff + 1) * self.dim
    }

    pub fn harmonic(&self, q: i64) -> &ComplexMatrix {
        &self.harmonics[(q + 2 * self.cutoff as i64) as usize]
    }

    fn offset(&self, n: i64) -> usize {
        (n + self.cutoff as i64) as usize * self.dim
    }

    pub fn fourier_indices(&self) -> std::ops::RangeInclusive<i64> {
        -(self.cutoff as i64)..=self.cutoff as i64
    }

    /// Block `n` of a stacked vector.
    pub fn component(&self, f: &ComplexVector, n: i64) -> ComplexVector {
        f.rows(self.offset(n), self.dim).into_owned()
    }

    /// Stacked vector with `ξ` in block `n` and zeros elsewhere (`e^{inωt}⊗ξ`).
    pub fn embed(&self, xi: &ComplexVector, n: i64) -> ComplexVector {
        let mut f = ComplexVector::zeros(self.size());
        f.rows_mut(self.offset(n), self.dim).copy_from(xi);
        f
    }

    /// `f(t) = Σ_n F_n e^{inωt}`.
    pub fn synthesize(&self, f: &ComplexVector, t: f64) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim);
        for n in self.fourier_indices() {
            out += self.component(f, n) * cis(n as f64 * self.omega * t);
        }
        out
    }

    pub fn spectrum(&self) -> Result<QuasienergySpectrum> {
        let eig = hermitian_eig(&self.matrix)?;
        let centroids: Vec<f64> = (0..eig.dim())
            .map(|k| {
                let v = eig.vectors.column(k).into_owned();
                self.fourier_indices().map(|n| n as f64 * self.component(&v, n).norm_squared()).sum()
            })
            .collect();
        let edge = 0.75 * self.cutoff as f64;
        let interior = centroids.iter().map(|c| c.abs() <= edge).collect();
        Ok(QuasienergySpectrum { eig, centroids, interior })
    }
}

/// Eigenpairs of `K` with the Fourier-index centroid of each eigenvector.
#[derive(Debug, Clone)]
pub struct QuasienergySpectrum {
    pub eig: EigenSystem,
    pub centroids: Vec<f64>,
    /// False for cutoff artifacts, centroid in the outer quarter of `[−N, N]`.
    pub interior: Vec<bool>,
}

impl QuasienergySpectrum {
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.interior.len()).filter(|&k| self.interior[k]).collect()
    }
}

/// `Ĥ_q = (1/Q) Σ_j H(jT/Q) e^{−2πiqj/Q}` and the assembled block matrix.
pub fn quasienergy_block(
    model: &ModelSpec,
    period: f64,
    cutoff: usize,
    quadrature: Option<usize>,
) -> Result<QuasienergyBlock> {
    if !model.has_generator() || matches!(model, ModelSpec::KickedLinear(_)) {
        return Err(Error::GeneratorNotAvailable { model: model.name() });
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    if let Some(p) = model.period() {
        let ratio = period / p;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::InvalidArgument(format!("period {period} is not a multiple of the model period {p}")));
        }
    } else if !model.is_autonomous() {
        return Err(Error::InvalidModel(format!("{} is not periodic", model.name())));
    }
    let need = 4 * cutoff + 2;
    let q_pts = quadrature.unwrap_or(8 * cutoff).max(1);
    if q_pts < need {
        return Err(Error::AliasedQuadrature { points: q_pts, cutoff, need });
    }
    let d = model.dim();
    let samples = (0..q_pts)
        .map(|j| model.hamiltonian_at(j as f64 * period / q_pts as f64).map(|h| h.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    let max_q = 2 * cutoff as i64;
    let harmonics: Vec<ComplexMatrix> = (-max_q..=max_q)
        .map(|q| {
            let mut acc = ComplexMatrix::zeros(d, d);
            for (j, h) in samples.iter().enumerate() {
                let r = (q * j as i64).rem_euclid(q_pts as i64);
                acc += h * cis(-TAU * r as f64 / q_pts as f64);
            }
            acc / C64::new(q_pts as f64, 0.0)
        })
        .collect();
    let omega = TAU / period;
    let blocks = 2 * cutoff + 1;
    let mut k = ComplexMatrix::zeros(blocks * d, blocks * d);
    for a in 0..blocks {
        for b in 0..blocks {
            let q = a as i64 - b as i64;
            let mut blk = harmonics[(q + max_q) as usize].clone();
            if a == b {
                let n = a as f64 - cutoff as f64;
                for i in 0..d {
                    blk[(i, i)] += C64::new(n * omega, 0.0);
                }
            }
            k.view_mut((a * d, b * d), (d, d)).copy_from(&blk);
        }
    }
    // Drop rounding-level imaginary noise so real generators keep the real solver path.
    if samples.iter().all(|h| h.iter().all(|z| z.im == 0.0)) && harmonics_are_real(&harmonics) {
        k.apply(|z| *z = C64::new(z.re, 0.0));
    }
    let matrix = HermitianOperator::with_tolerance(k, 1e-10)?;
    Ok(QuasienergyBlock { cutoff, omega, period, dim: d, quadrature: q_pts, harmonics, matrix })
}

fn harmonics_are_real(h: &[ComplexMatrix]) -> bool {
    let mid = h.len() / 2;
    h.iter().enumerate().all(|(i, m)| i == mid || m.norm() < 1e-14)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub floquet_index: usize,
    /// `α/T mod ω`.
    pub floquet_value: f64,
    pub quasienergy_index: usize,
    /// `λ mod ω`.
    pub quasienergy_value: f64,
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub cutoff: usize,
    pub pairs: Vec<MatchedPair>,
    pub max_mismatch: f64,
    pub unmatched: usize,
    pub interior_eigenvalues: usize,
}

/// Greedy wrap-distance matching of Floquet quasienergies against interior
/// eigenvalues of `K`, both reduced modulo `ω`.
pub fn correspondence_check(
    block: &QuasienergyBlock,
    qs: &QuasienergySpectrum,
    floquet: &FloquetSpectrum,
) -> CorrespondenceReport {
    let omega = block.omega;
    let targets: Vec<f64> = floquet.phases.iter().map(|a| (a / block.period).rem_euclid(omega)).collect();
    let interior = qs.interior_indices();
    let values: Vec<f64> = interior.iter().map(|&k| qs.eig.values[k].rem_euclid(omega)).collect();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(targets.len() * values.len());
    for (j, &a) in targets.iter().enumerate() {
        for (i, &l) in values.iter().enumerate() {
            candidates.push((circular_distance(a, l, omega), j, i));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_f = vec![false; targets.len()];
    let mut used_k = vec![false; values.len()];
    let mut pairs = Vec::with_capacity(targets.len());
    for (d, j, i) in candidates {
        if used_f[j] || used_k[i] {
            continue;
        }
        used_f[j] = true;
        used_k[i] = true;
        pairs.push(MatchedPair {
            floquet_index: j,
            floquet_value: targets[j],
            quasienergy_index: interior[i],
            quasienergy_value: values[i],
            mismatch: d,
        });
        if pairs.len() == targets.len() {
            break;
        }
    }
    pairs.sort_by_key(|p| p.floquet_index);
    let max_mismatch = pairs.iter().fold(0.0, |m: f64, p| m.max(p.mismatch));
    CorrespondenceReport {
        cutoff: block.cutoff,
        unmatched: targets.len() - pairs.len(),
        pairs,
        max_mismatch,
        interior_eigenvalues: interior.len(),
    }
}

/// Fourier blocks `F_n = (1/Q) Σ_j f(t_j) e^{−inωt_j}` of a periodic
/// function sampled at `t_j = jT/Q`.
pub fn fourier_coefficients(block: &QuasienergyBlock, samples: &[ComplexVector]) -> Result<ComplexVector> {
    let q_pts = samples.len();
    if q_pts < 2 * block.cutoff + 1 {
        return Err(Error::AliasedQuadrature { points: q_pts, cutoff: block.cutoff, need: 2 * block.cutoff + 1 });
    }
    let mut f = ComplexVector::zeros(block.size());
    for n in block.fourier_indices() {
        let mut acc = ComplexVector::zeros(block.dim);
        for (j, s) in samples.iter().enumerate() {
            if s.len() != block.dim {
                return Err(Error::DimensionMismatch { expected: block.dim, found: s.len() });
            }
            let r = (n * j as i64).rem_euclid(q_pts as i64);
            acc += s * cis(-TAU * r as f64 / q_pts as f64);
        }
        f.rows_mut(block.offset(n), block.dim).copy_from(&(acc / C64::new(q_pts as f64, 0.0)));
    }
    Ok(f)
}

/// `max_t ‖(e^{−iKσ}f)(t) − U(t,0)U(t−σ,0)⁻¹ f(t−σ)‖` over up to `samples`
/// cache times `t ≥ σ`.
pub fn releq_check(
    block: &QuasienergyBlock,
    qs: &QuasienergySpectrum,
    f: &ComplexVector,
    sigma: f64,
    cache: &PropagatorCache,
    samples: usize,
) -> Result<f64> {
    if f.len() != block.size() {
        return Err(Error::DimensionMismatch { expected: block.size(), found: f.len() });
    }
    let k_sigma = cache.grid.index_of(sigma)?;
    let evolved = qs.eig.evolve_vector(&qs.eig.coefficients(f), sigma);
    let span = cache.grid.count - k_sigma;
    let stride = (span / samples.max(1)).max(1);
    let mut worst = 0.0_f64;
    for k in (k_sigma..=cache.grid.count).step_by(stride) {
        let t = cache.grid.time(k);
        let lhs = block.synthesize(&evolved, t);
        let ut = cache.unitaries[k].matrix();
        let us = cache.unitaries[k - k_sigma].matrix();
        let rhs = ut * (us.adjoint() * block.synthesize(f, cache.grid.time(k - k_sigma)));
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `σ ↦ Σ_m c_m e^{iλ_mσ} ψ_m(0)` reconstructing `U(0,σ)ξ` from the
/// expansion `1⊗ξ = Σ_m c_m ψ_m` over interior eigenvectors of `K`.
#[derive(Debug, Clone)]
pub struct Prop34Synthesis {
    pub coefficients: Vec<C64>,
    pub eigenvalues: Vec<f64>,
    pub modes_at_zero: Vec<ComplexVector>,
    /// `‖1⊗ξ − Σ_m c_m ψ_m‖` over the retained eigenvectors.
    pub residual: f64,
}

impl Prop34Synthesis {
    pub fn evaluate(&self, sigma: f64) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.modes_at_zero[0].len());
        for ((c, &l), m) in self.coefficients.iter().zip(&self.eigenvalues).zip(&self.modes_at_zero) {
            out += m * (c * cis(l * sigma));
        }
        out
    }

    pub fn orbit(&self, grid: &TimeGrid) -> Result<OrbitSample> {
        OrbitSample::from_states(*grid, (0..grid.len()).map(|k| self.evaluate(grid.time(k))).collect())
    }
}

pub fn prop34_synthesis(block: &QuasienergyBlock, qs: &QuasienergySpectrum, xi: &ComplexVector) -> Result<Prop34Synthesis> {
    if xi.len() != block.dim {
        return Err(Error::DimensionMismatch { expected: block.dim, found: xi.len() });
    }
    let f = block.embed(xi, 0);
    let mut captured = ComplexVector::zeros(block.size());
    let mut coefficients = Vec::new();
    let mut eigenvalues = Vec::new();
    let mut modes_at_zero = Vec::new();
    for k in qs.interior_indices() {
        let v = qs.eig.vector(k);
        let c = v.dotc(&f);
        if c.norm() == 0.0 {
            continue;
        }
        captured += &v * c;
        coefficients.push(c);
        eigenvalues.push(qs.eig.values[k]);
        modes_at_zero.push(block.synthesize(&v, 0.0));
    }
    let residual = (f - captured).norm();
    const LIMIT: f64 = 1e-6;
    if residual > LIMIT || coefficients.is_empty() {
        return Err(Error::ExpansionResidualTooLarge { residual, limit: LIMIT });
    }
    Ok(Prop34Synthesis { coefficients, eigenvalues, modes_at_zero, residual })
}
