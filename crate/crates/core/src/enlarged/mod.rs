//! Enlarged space `L²(S¹, H)` on a discretized circle of fibre angles.
//!
//! The rotation `θ ↦ θ + 2πα` is realized exactly on a `q`-point grid by
//! replacing α with a continued-fraction convergent `p/q`; physical-space
//! models elsewhere in the crate keep α as given.

mod series;

pub use series::{
    af_direct, af_report, af_series, b_matrix, summability_bound, theorem410_check, theta_derivative_sup, AfReport,
    SummabilityReport, SummabilityTrend, Theorem410Report,
};

use serde::Serialize;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, is_finite_vector, ComplexMatrix, ComplexVector, EigenSystem, HermitianOperator,
    UnitaryOperator};
use crate::models::QuasiperiodicExactParams;
use crate::spectral::floquet_spectrum;

/// Largest `q·d` accepted by [`enlarged_spectrum`].
pub const MAX_ENLARGED_DIM: usize = 4096;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Continued-fraction convergents `p/q` of `alpha` with `q ≤ max_q`.
pub fn convergents(alpha: f64, max_q: u64) -> Result<Vec<(u64, u64)>> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be finite and nonnegative, got {alpha}")));
    }
    let (mut p_prev, mut q_prev, mut p, mut q) = (1u64, 0u64, alpha.floor() as u64, 1u64);
    let mut out = vec![(p, q)];
    let mut x = alpha - alpha.floor();
    while x > 1e-15 {
        x = 1.0 / x;
        let a = x.floor();
        x -= a;
        let a = a as u64;
        let (pn, qn) = (a * p + p_prev, a * q + q_prev);
        if qn > max_q {
            break;
        }
        (p_prev, q_prev, p, q) = (p, q, pn, qn);
        out.push((p, q));
    }
    Ok(out)
}

/// `q` fibre angles `θ_j = 2πj/q` with the rotation by `p` cells per period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusGrid {
    pub p: u64,
    pub q: u64,
    pub alpha: f64,
}

impl TorusGrid {
    /// Convergent grid for `alpha`; `p = 0` is accepted only for the trivial
    /// flow `alpha = 0`.
    pub fn new(p: u64, q: u64, alpha: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("grid size q must be positive".into()));
        }
        if p == 0 && alpha == 0.0 {
            return Ok(Self { p, q, alpha });
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidArgument(format!("p/q = {p}/{q} is not in lowest terms")));
        }
        let err = (alpha - p as f64 / q as f64).abs();
        if err > 1.0 / (q * q) as f64 {
            return Err(Error::InvalidArgument(format!(
                "|α − p/q| = {err:e} exceeds 1/q² for p/q = {p}/{q}"
            )));
        }
        Ok(Self { p, q, alpha })
    }

    /// Grid whose size is the convergent denominator `q` of `alpha`.
    pub fn convergent(alpha: f64, q: u64) -> Result<Self> {
        let cf = convergents(alpha, q)?;
        match cf.iter().find(|c| c.1 == q) {
            Some(&(p, q)) => Self::new(p, q, alpha),
            None => Err(Error::InvalidArgument(format!(
                "{q} is not a convergent denominator of {alpha}; available: {:?}",
                cf.iter().map(|c| c.1).collect::<Vec<_>>()
            ))),
        }
    }

    /// Trivial flow on `q` points.
    pub fn trivial(q: u64) -> Result<Self> {
        Self::new(0, q, 0.0)
    }

    pub fn len(&self) -> usize {
        self.q as usize
    }

    pub fn is_empty(&self) -> bool {
        self.q == 0
    }

    /// Shift in grid cells per period.
    pub fn shift(&self) -> usize {
        (self.p % self.q) as usize
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.q as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.theta(j)).collect()
    }
}

/// A vector-valued function on the grid, with norm `‖f‖² = (1/q) Σ_j ‖f(θ_j)‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnlargedState {
    values: Vec<ComplexVector>,
}

impl EnlargedState {
    pub fn new(values: Vec<ComplexVector>) -> Result<Self> {
        let d = values.first().map(|v| v.len()).ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
        for v in &values {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
            if !is_finite_vector(v) {
                return Err(Error::NonFinite { what: "enlarged state" });
            }
        }
        Ok(Self { values })
    }

    /// `1 ⊗ φ` on `q` points.
    pub fn constant(q: usize, phi: &ComplexVector) -> Result<Self> {
        Self::new(vec![phi.clone(); q])
    }

    /// Unflatten a `q·d` vector laid out fibre by fibre.
    pub fn from_flat(q: usize, flat: &ComplexVector) -> Result<Self> {
        if q == 0 || !flat.len().is_multiple_of(q) {
            return Err(Error::DimensionMismatch { expected: q, found: flat.len() });
        }
        let d = flat.len() / q;
        Self::new((0..q).map(|j| flat.rows(j * d, d).into_owned()).collect())
    }

    pub fn flat(&self) -> ComplexVector {
        let d = self.dim();
        ComplexVector::from_iterator(self.len() * d, self.values.iter().flat_map(|v| v.iter().copied()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fibre dimension `d`.
    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self) -> &[ComplexVector] {
        &self.values
    }

    pub fn at(&self, j: usize) -> &ComplexVector {
        &self.values[j]
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_squared()).sum::<f64>() / self.len() as f64
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() || self.dim() != other.dim() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `(1/q) Σ_j ⟨f(θ_j), g(θ_j)⟩`.
    pub fn inner(&self, other: &Self) -> Result<crate::linalg::C64> {
        self.same_shape(other)?;
        let s: crate::linalg::C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.dotc(b)).sum();
        Ok(s / self.len() as f64)
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_squared()).sum();
        Ok((s / self.len() as f64).sqrt())
    }
}

/// `(U_F f)(θ_j) = u₁(θ_{j−p}) f(θ_{j−p})`, indices cyclic.
pub fn generalized_floquet_apply(u1: &[UnitaryOperator], shift: usize, f: &EnlargedState) -> Result<EnlargedState> {
    let q = f.len();
    if u1.len() != q {
        return Err(Error::GridMismatch);
    }
    if shift >= q {
        return Err(Error::ShiftMismatch { shift, cells: q });
    }
    if u1.iter().any(|u| u.dim() != f.dim()) {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: u1[0].dim() });
    }
    let values = (0..q)
        .map(|j| {
            let src = (j + q - shift) % q;
            u1[src].apply(f.at(src))
        })
        .collect();
    Ok(EnlargedState { values })
}

/// Dense matrix of [`generalized_floquet_apply`] on the flattened space.
pub fn enlarged_floquet_matrix(u1: &[UnitaryOperator], shift: usize) -> Result<UnitaryOperator> {
    let q = u1.len();
    if q == 0 {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    if shift >= q {
        return Err(Error::ShiftMismatch { shift, cells: q });
    }
    let d = u1[0].dim();
    let mut m = ComplexMatrix::zeros(q * d, q * d);
    for j in 0..q {
        let src = (j + q - shift) % q;
        m.view_mut((j * d, src * d), (d, d)).copy_from(u1[src].matrix());
    }
    Ok(UnitaryOperator::from_parts(m))
}

/// Nearest-neighbour statistics of eigenphases on the circle, gaps
/// normalized to unit mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapStatistics {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub std_dev: f64,
    /// Fraction of normalized gaps below 0.1.
    pub small_gap_fraction: f64,
}

pub fn gap_statistics(phases: &[f64]) -> GapStatistics {
    let n = phases.len();
    if n < 2 {
        return GapStatistics { count: n, min: 0.0, max: 0.0, std_dev: 0.0, small_gap_fraction: 0.0 };
    }
    let mut sorted: Vec<f64> = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let scale = n as f64 / TAU;
    let gaps: Vec<f64> = (0..n)
        .map(|k| {
            let next = if k + 1 < n { sorted[k + 1] } else { sorted[0] + TAU };
            (next - sorted[k]) * scale
        })
        .collect();
    let var = gaps.iter().map(|g| (g - 1.0).powi(2)).sum::<f64>() / n as f64;
    GapStatistics {
        count: n,
        min: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max: gaps.iter().copied().fold(0.0, f64::max),
        std_dev: var.sqrt(),
        small_gap_fraction: gaps.iter().filter(|&&g| g < 0.1).count() as f64 / n as f64,
    }
}

/// Counts of phases in `bins` equal cells of `[0, 2π)`.
pub fn phase_histogram(phases: &[f64], bins: usize) -> Vec<usize> {
    let mut h = vec![0; bins.max(1)];
    for &a in phases {
        let b = ((a.rem_euclid(TAU) / TAU) * h.len() as f64) as usize;
        let last = h.len() - 1;
        h[b.min(last)] += 1;
    }
    h
}

/// Eigenpairs of the generalized Floquet operator, states normalized in the
/// enlarged norm.
#[derive(Debug, Clone)]
pub struct EnlargedSpectrum {
    pub period: f64,
    pub phases: Vec<f64>,
    pub states: Vec<EnlargedState>,
    pub max_residual: f64,
    pub gaps: GapStatistics,
}

impl EnlargedSpectrum {
    /// `λ_n = α_n / T₂`.
    pub fn quasienergies(&self) -> Vec<f64> {
        self.phases.iter().map(|a| a / self.period).collect()
    }
}

pub fn enlarged_spectrum(u1: &[UnitaryOperator], shift: usize, period: f64) -> Result<EnlargedSpectrum> {
    let q = u1.len();
    let d = u1.first().map(|u| u.dim()).unwrap_or(0);
    if q * d > MAX_ENLARGED_DIM {
        return Err(Error::DimensionTooLarge { dim: q * d, limit: MAX_ENLARGED_DIM });
    }
    let m = enlarged_floquet_matrix(u1, shift)?;
    let spec = floquet_spectrum(&m)?;
    let root_q = (q as f64).sqrt();
    let states = (0..spec.dim())
        .map(|k| EnlargedState::from_flat(q, &spec.vector(k).scale(root_q)))
        .collect::<Result<Vec<_>>>()?;
    let gaps = gap_statistics(&spec.phases);
    Ok(EnlargedSpectrum { period, max_residual: spec.max_residual(), phases: spec.phases, states, gaps })
}

/// A θ-indexed family of fibre dynamics `U_θ(t, 0)` over the circle.
#[derive(Debug, Clone)]
pub enum FiberFamily {
    /// `H_θ = H` for every θ, with a trivial flow: the pure-point toy setting.
    Constant { hamiltonian: HermitianOperator, period: f64, eig: EigenSystem },
    /// The exactly solvable two-level quasiperiodic family, fibre angle θ₁.
    Quasiperiodic(QuasiperiodicExactParams),
}

impl FiberFamily {
    pub fn constant(hamiltonian: HermitianOperator, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        let eig = hermitian_eig(&hamiltonian)?;
        Ok(Self::Constant { hamiltonian, period, eig })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant { hamiltonian, .. } => hamiltonian.dim(),
            Self::Quasiperiodic(_) => 2,
        }
    }

    /// Stroboscopic period `T₂`.
    pub fn period(&self) -> f64 {
        match self {
            Self::Constant { period, .. } => *period,
            Self::Quasiperiodic(p) => p.t2(),
        }
    }

    /// Rotation number of the flow per period.
    pub fn alpha(&self) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Quasiperiodic(p) => p.alpha(),
        }
    }

    /// Flow speed `ω₁`; constant for linear torus flows.
    pub fn flow_speed(&self) -> f64 {
        self.alpha() * TAU / self.period()
    }

    pub fn u1(&self, theta: f64) -> UnitaryOperator {
        match self {
            Self::Constant { eig, period, .. } => eig.evolution(*period),
            Self::Quasiperiodic(_) => QuasiperiodicExactParams::u1(theta),
        }
    }

    /// `u₁(θ_j)` on the grid, after checking that the grid rotation matches
    /// the family's rotation number.
    pub fn u1_samples(&self, grid: &TorusGrid) -> Result<Vec<UnitaryOperator>> {
        let q = grid.q as f64;
        let consistent = match self {
            Self::Constant { .. } => grid.shift() == 0,
            Self::Quasiperiodic(p) => (p.alpha() - grid.p as f64 / q).abs() <= 1.0 / (q * q),
        };
        if !consistent {
            return Err(Error::ShiftMismatch { shift: grid.shift(), cells: grid.len() });
        }
        Ok(match self {
            Self::Constant { .. } => vec![self.u1(0.0); grid.len()],
            Self::Quasiperiodic(_) => grid.thetas().iter().map(|&t| self.u1(t)).collect(),
        })
    }

    /// `U_θ(t, 0) ψ`.
    pub fn evolve(&self, theta: f64, t: f64, psi: &ComplexVector) -> ComplexVector {
        match self {
            Self::Constant { eig, .. } => eig.evolve_vector(&eig.coefficients(psi), t),
            Self::Quasiperiodic(p) => p.with_theta1(theta).propagator(t).apply(psi),
        }
    }

    /// `H_θ(t)` when the family has one.
    pub fn hamiltonian(&self, _theta: f64, _t: f64) -> Result<HermitianOperator> {
        match self {
            Self::Constant { hamiltonian, .. } => Ok(hamiltonian.clone()),
            Self::Quasiperiodic(_) => Err(Error::GeneratorNotAvailable { model: "QuasiperiodicExact" }),
        }
    }
}
