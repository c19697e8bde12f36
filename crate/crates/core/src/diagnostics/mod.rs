//! Finite-horizon detectors over sampled orbits.
//!
//! Every verdict is a statement about the sampled horizon only: "consistent
//! with" boundedness or almost periodicity, never a proof of it.

mod ap;

pub use ap::{ap_scan, covering_number, ApReport, ApVerdict, ApWitness, CoveringReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, ComplexVector, HermitianOperator, I};
use crate::models::ModelSpec;
use crate::propagator::{OrbitSample, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailTrend {
    ToZero,
    ToOne,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEscapeReport {
    pub energies: Vec<f64>,
    /// `β(E) = max_t ‖F(A>E)ψ(t)‖ / ‖ψ₀‖`.
    pub beta: Vec<f64>,
    pub trend: TailTrend,
}

/// Probe-tail weights above each threshold in `energies`.
pub fn tail_escape(orbit: &OrbitSample, probe: &HermitianOperator, energies: &[f64]) -> Result<TailEscapeReport> {
    if probe.dim() != orbit.dim() {
        return Err(Error::DimensionMismatch { expected: orbit.dim(), found: probe.dim() });
    }
    if energies.is_empty() || energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("energy grid must be non-empty and nondecreasing".into()));
    }
    let eig = hermitian_eig(probe)?;
    let n0 = orbit.states[0].norm();
    let scale = if n0 > 0.0 { n0 } else { 1.0 };
    let mut beta = vec![0.0_f64; energies.len()];
    for psi in &orbit.states {
        let c = eig.coefficients(psi);
        // Suffix sums of |c_k|² over ascending eigenvalues.
        let mut tail = vec![0.0; eig.dim() + 1];
        for k in (0..eig.dim()).rev() {
            tail[k] = tail[k + 1] + c[k].norm_sqr();
        }
        for (b, &e) in beta.iter_mut().zip(energies) {
            let first_above = eig.values.partition_point(|&v| v <= e);
            *b = b.max(tail[first_above].sqrt() / scale);
        }
    }
    // Nested projections make β nonincreasing; clear rounding-level inversions.
    for k in 1..beta.len() {
        beta[k] = beta[k].min(beta[k - 1]);
    }
    let last = *beta.last().expect("non-empty");
    let trend = if last < 0.1 {
        TailTrend::ToZero
    } else if last > 0.9 {
        TailTrend::ToOne
    } else {
        TailTrend::Indeterminate
    };
    Ok(TailEscapeReport { energies: energies.to_vec(), beta, trend })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RageReport {
    pub rank: usize,
    pub taus: Vec<f64>,
    /// `a(τ) = (1/τ) ∫₀^τ ‖Cψ(t)‖ dt` by the trapezoid rule.
    pub averages: Vec<f64>,
}

/// Cesàro averages of `‖Cψ(t)‖` for `C` the projection onto the span of the
/// orthonormal columns of `range`.
pub fn rage_average(orbit: &OrbitSample, range: &ComplexMatrix, taus: &[f64]) -> Result<RageReport> {
    if range.nrows() != orbit.dim() {
        return Err(Error::DimensionMismatch { expected: orbit.dim(), found: range.nrows() });
    }
    let r = range.ncols();
    let ortho = (range.adjoint() * range - ComplexMatrix::identity(r, r)).norm();
    if r == 0 || ortho > 1e-10 {
        return Err(Error::InvalidArgument("projection range must have orthonormal columns".into()));
    }
    let weights: Vec<f64> = orbit.states.iter().map(|psi| (range.adjoint() * psi).norm()).collect();
    let h = orbit.grid.h;
    let mut cumulative = vec![0.0; weights.len()];
    for k in 1..weights.len() {
        cumulative[k] = cumulative[k - 1] + 0.5 * h * (weights[k - 1] + weights[k]);
    }
    let averages = taus
        .iter()
        .map(|&tau| {
            if !(tau > 0.0) {
                return Err(Error::InvalidArgument(format!("τ must be positive, got {tau}")));
            }
            let k = orbit.grid.index_of(orbit.grid.t0 + tau)?;
            Ok(cumulative[k] / (k as f64 * h))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RageReport { rank: r, taus: taus.to_vec(), averages })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest discarded imaginary part.
    pub max_imaginary: f64,
}

impl EnergySeries {
    pub fn from_values(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, values, max_imaginary: 0.0 })
    }

    fn from_complex(times: Vec<f64>, z: Vec<crate::linalg::C64>) -> Self {
        let max_imaginary = z.iter().fold(0.0, |m: f64, v| m.max(v.im.abs()));
        Self { times, values: z.iter().map(|v| v.re).collect(), max_imaginary }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

/// `E_ψ^A(t) = ⟨ψ(t), Aψ(t)⟩`.
pub fn energy_series(orbit: &OrbitSample, probe: &HermitianOperator) -> Result<EnergySeries> {
    if probe.dim() != orbit.dim() {
        return Err(Error::DimensionMismatch { expected: orbit.dim(), found: probe.dim() });
    }
    let z = orbit.states.iter().map(|psi| probe.expectation(psi)).collect();
    Ok(EnergySeries::from_complex(orbit.grid.times(), z))
}

/// `⟨ψ(t), H(t)ψ(t)⟩` along the orbit.
pub fn generator_expectation(orbit: &OrbitSample, model: &ModelSpec) -> Result<EnergySeries> {
    let times = orbit.grid.times();
    let z = times
        .iter()
        .zip(&orbit.states)
        .map(|(&t, psi)| model.hamiltonian_at(t).map(|h| h.expectation(psi)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergySeries::from_complex(times, z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub h: f64,
    /// `max_t |ΔE/2h − ⟨ψ(t), V'(t)ψ(t)⟩|` over interior grid points.
    pub max_defect: f64,
}

/// Centred-difference `dE/dt` of `E(t) = ⟨ψ, H(t)ψ⟩` against `⟨ψ, V'(t)ψ⟩`.
pub fn energy_derivative_check(orbit: &OrbitSample, model: &ModelSpec) -> Result<DerivativeCheck> {
    model.perturbation_derivative(orbit.grid.t0)?;
    if orbit.len() < 3 {
        return Err(Error::InvalidGrid("derivative check needs at least three samples".into()));
    }
    let e = generator_expectation(orbit, model)?;
    let h = orbit.grid.h;
    let mut max_defect = 0.0_f64;
    for k in 1..orbit.len() - 1 {
        let fd = (e.values[k + 1] - e.values[k - 1]) / (2.0 * h);
        let vp = model.perturbation_derivative(orbit.time(k))?.expectation(&orbit.states[k]).re;
        max_defect = max_defect.max((fd - vp).abs());
    }
    Ok(DerivativeCheck { h, max_defect })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftBoundCheck {
    /// `max_t (|E(t) − E(0)| − t·sup‖V'‖·‖ψ₀‖²)⁺`.
    pub linear_violation: f64,
    /// Same against the model's integrated bound `∫₀ᵗ‖V'‖`, when it has one.
    pub integral_violation: Option<f64>,
    pub sup_derivative: f64,
}

/// Pointwise energy-drift bounds for `E(t) = ⟨ψ, H(t)ψ⟩`.
pub fn energy_drift_bound(orbit: &OrbitSample, model: &ModelSpec) -> Result<DriftBoundCheck> {
    let sup = model.perturbation_derivative_sup_norm()?;
    let e = generator_expectation(orbit, model)?;
    let n2 = orbit.states[0].norm_squared();
    let t0 = orbit.grid.t0;
    let mut linear = 0.0_f64;
    let mut integral: Option<f64> = match model {
        ModelSpec::BoundedPerturbation(_) => Some(0.0),
        _ => None,
    };
    for (k, &t) in e.times.iter().enumerate() {
        let drift = (e.values[k] - e.values[0]).abs();
        linear = linear.max(drift - (t - t0).abs() * sup * n2);
        if let (Some(v), ModelSpec::BoundedPerturbation(p)) = (integral.as_mut(), model) {
            let bound = (p.derivative_integral_bound(t) - p.derivative_integral_bound(t0)).abs();
            *v = v.max(drift - bound * n2);
        }
    }
    Ok(DriftBoundCheck {
        linear_violation: linear.max(0.0),
        integral_violation: integral.map(|v| v.max(0.0)),
        sup_derivative: sup,
    })
}

/// `max_t |E(t) − E⁰(t)| − supV·‖ψ₀‖²`, clipped at 0.
pub fn bounded_v_equivalence(e: &EnergySeries, e0: &EnergySeries, sup_v: f64, psi0_norm_sq: f64) -> Result<f64> {
    if e.times.len() != e0.times.len() || e.times.iter().zip(&e0.times).any(|(a, b)| a != b) {
        return Err(Error::GridMismatch);
    }
    let worst = e.values.iter().zip(&e0.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((worst - sup_v * psi0_norm_sq).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityThresholds {
    pub growth_exponent: f64,
    pub sup_ratio: f64,
    /// RMS residual of the log-log fit below which a growth claim is accepted.
    pub max_fit_residual: f64,
}

impl Default for StabilityThresholds {
    fn default() -> Self {
        Self { growth_exponent: 0.1, sup_ratio: 1.05, max_fit_residual: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StabilityVerdict {
    BoundedConsistent { sup_ratio: f64 },
    Growth { gamma: f64, fit_residual: f64 },
    Indeterminate { gamma: f64, fit_residual: f64, sup_ratio: f64 },
}

/// Log-log growth fit on the latter half of the positive times, then a
/// decade-over-decade sup comparison.
pub fn stability_verdict(series: &EnergySeries, thresholds: &StabilityThresholds) -> Result<StabilityVerdict> {
    let pts: Vec<(f64, f64)> =
        series.times.iter().zip(&series.values).filter(|(t, _)| **t > 0.0).map(|(t, v)| (*t, *v)).collect();
    let (t_min, t_max) = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::HorizonTooShort { decades: 0.0 }),
    };
    let decades = (t_max / t_min).log10();
    if decades < 2.0 - 1e-9 {
        return Err(Error::HorizonTooShort { decades });
    }
    let mid = 0.5 * (t_min.ln() + t_max.ln());
    let fit: Vec<(f64, f64)> =
        pts.iter().filter(|(t, v)| t.ln() >= mid && *v != 0.0).map(|(t, v)| (t.ln(), v.abs().ln())).collect();
    let (gamma, fit_residual) = if fit.len() >= 2 {
        let n = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let rms = (fit.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
        (slope, rms)
    } else {
        (0.0, 0.0)
    };
    let sup_in = |lo: f64, hi: f64| {
        pts.iter().filter(|(t, _)| *t >= lo && *t <= hi).fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
    };
    let last = sup_in(t_max / 10.0, t_max);
    let prev = sup_in(t_max / 100.0, t_max / 10.0);
    let sup_ratio = if prev > 0.0 {
        last / prev
    } else if last == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    if gamma > thresholds.growth_exponent && fit_residual <= thresholds.max_fit_residual {
        return Ok(StabilityVerdict::Growth { gamma, fit_residual });
    }
    if sup_ratio <= thresholds.sup_ratio {
        return Ok(StabilityVerdict::BoundedConsistent { sup_ratio });
    }
    Ok(StabilityVerdict::Indeterminate { gamma, fit_residual, sup_ratio })
}

/// Finite-difference derivative orbit `dψ/dt`: centred in the interior,
/// second-order one-sided at the ends.
pub fn derivative_orbit(orbit: &OrbitSample) -> Result<OrbitSample> {
    let n = orbit.len();
    if n < 3 {
        return Err(Error::InvalidGrid("derivative orbit needs at least three samples".into()));
    }
    let h = orbit.grid.h;
    let s = &orbit.states;
    let mut d: Vec<ComplexVector> = Vec::with_capacity(n);
    d.push((s[1].scale(4.0) - s[0].scale(3.0) - &s[2]).unscale(2.0 * h));
    for k in 1..n - 1 {
        d.push((&s[k + 1] - &s[k - 1]).unscale(2.0 * h));
    }
    d.push((s[n - 1].scale(3.0) - s[n - 2].scale(4.0) + &s[n - 3]).unscale(2.0 * h));
    OrbitSample::from_states(orbit.grid, d)
}

/// `⟨ψ(t), i dψ/dt(t)⟩` from the finite-difference derivative orbit.
pub fn derivative_expectation(orbit: &OrbitSample, derivative: &OrbitSample) -> Result<EnergySeries> {
    if orbit.grid != derivative.grid {
        return Err(Error::GridMismatch);
    }
    let z = orbit.states.iter().zip(&derivative.states).map(|(p, d)| p.dotc(&(d * I))).collect();
    Ok(EnergySeries::from_complex(orbit.grid.times(), z))
}

/// Synthetic orbit sampled from a closure, for analytic test inputs.
pub fn sample_orbit<F>(grid: &TimeGrid, f: F) -> Result<OrbitSample>
where
    F: Fn(f64) -> ComplexVector,
{
    OrbitSample::from_states(*grid, (0..grid.len()).map(|k| f(grid.time(k))).collect())
}
