//! Time evolution: exponential-midpoint stepping, closed forms, kicked
//! splitting, and the Floquet factorization for periodic models.

mod cache;

pub use cache::{cocycle_defect, floquet_orbit, monodromy, propagator_at, PropagatorCache};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, expm_i_hermitian, hermitian_eig, is_finite_vector, ComplexVector, UnitaryOperator};
use crate::models::{KickStepper, KickedLinearParams, ModelSpec};
use crate::tolerance::Tolerances;

/// Uniform grid `t_k = t₀ + k·h`, `k = 0..=count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub h: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, h: f64, count: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be positive and finite, got {h}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidGrid("t0 must be finite".into()));
        }
        Ok(Self { t0, h, count })
    }

    /// Grid from `t₀` to `t₁`; the span must be an integer number of steps.
    pub fn from_span(t0: f64, t1: f64, h: f64) -> Result<Self> {
        let grid = Self::new(t0, h, 0)?;
        if !(t1 >= t0) || !t1.is_finite() {
            return Err(Error::InvalidGrid(format!("need t1 ≥ t0, got [{t0}, {t1}]")));
        }
        let steps = (t1 - t0) / h;
        let count = steps.round();
        if (steps - count).abs() > 1e-6 {
            return Err(Error::InvalidGrid(format!("span [{t0}, {t1}] is not a multiple of h = {h}")));
        }
        Ok(Self { count: count as usize, ..grid })
    }

    /// `count` equal steps covering `[t₀, t₁]`.
    pub fn with_count(t0: f64, t1: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidGrid("count must be positive".into()));
        }
        Self::new(t0, (t1 - t0) / count as f64, count)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn t1(&self) -> f64 {
        self.time(self.count)
    }

    /// Number of sample points, `count + 1`.
    pub fn len(&self) -> usize {
        self.count + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Index of a grid time, accepting rounding up to `1e-6·h`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.t0) / self.h;
        let k = x.round();
        if (x - k).abs() > 1e-6 || k < 0.0 || k > self.count as f64 {
            return Err(Error::TimeNotOnGrid { t });
        }
        Ok(k as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Kicked splitting, autonomous eigenbasis, closed form, else stepping.
    #[default]
    Auto,
    Stepped,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationOptions {
    pub method: Method,
    /// Midpoint steps per grid interval.
    pub substeps: usize,
    /// Polar re-unitarization period for accumulated propagators.
    pub reunitarize_every: usize,
    /// Largest step used when no grid dictates one (monodromy, lead-in to t₀).
    pub max_step: f64,
    pub max_norm_drift: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            substeps: 1,
            reunitarize_every: 100,
            max_step: 1e-3,
            max_norm_drift: Tolerances::DEFAULT.max_norm_drift,
        }
    }
}

/// Sampled trajectory `ψ(t_k) = U(t_k, 0)ψ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSample {
    pub grid: TimeGrid,
    pub states: Vec<ComplexVector>,
    /// `max_k |‖ψ(t_k)‖ − ‖ψ₀‖|`.
    pub max_norm_drift: f64,
}

impl OrbitSample {
    /// Wraps precomputed samples, measuring drift against the first state.
    pub fn from_states(grid: TimeGrid, states: Vec<ComplexVector>) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: states.len() });
        }
        let dim = states[0].len();
        if states.iter().any(|s| s.len() != dim) {
            return Err(Error::InvalidArgument("orbit states differ in dimension".into()));
        }
        let n0 = states[0].norm();
        let max_norm_drift = states.iter().fold(0.0_f64, |m, s| m.max((s.norm() - n0).abs()));
        Ok(Self { grid, states, max_norm_drift })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.grid.time(k)
    }
}

/// `exp(−i h H(t + h/2))`.
pub fn step_midpoint(model: &ModelSpec, t: f64, h: f64) -> Result<UnitaryOperator> {
    let hm = model.hamiltonian_at(t + 0.5 * h)?;
    expm_i_hermitian(&hm, h)
}

fn resolve_method(model: &ModelSpec, method: Method) -> Result<Resolved> {
    Ok(match (method, model) {
        (_, ModelSpec::KickedLinear(p)) => Resolved::Kicked(p.clone()),
        (Method::Exact, _) if !model.has_closed_form() => return Err(Error::NoClosedForm { model: model.name() }),
        (Method::Stepped, _) if !model.has_generator() => {
            return Err(Error::GeneratorNotAvailable { model: model.name() })
        }
        (Method::Stepped, _) => Resolved::Stepped,
        (_, _) if model.is_autonomous() => Resolved::Autonomous,
        (_, _) if model.has_closed_form() => Resolved::Exact,
        _ => Resolved::Stepped,
    })
}

enum Resolved {
    Kicked(KickedLinearParams),
    Autonomous,
    Exact,
    Stepped,
}

/// Evolves `ψ` from `t` to `t + span` in `n` equal midpoint steps.
fn step_vector(model: &ModelSpec, psi: &mut ComplexVector, t: f64, span: f64, n: usize) -> Result<()> {
    let h = span / n as f64;
    for j in 0..n {
        let u = step_midpoint(model, t + j as f64 * h, h)?;
        *psi = u.apply(psi);
    }
    Ok(())
}

/// Sequential kicked evolution, tracking the last integer time reached.
struct KickedEvolution {
    stepper: KickStepper,
    params: KickedLinearParams,
    kicks_done: usize,
    at_integer: ComplexVector,
}

impl KickedEvolution {
    fn new(params: &KickedLinearParams, psi0: &ComplexVector) -> Self {
        Self { stepper: KickStepper::new(params), params: params.clone(), kicks_done: 0, at_integer: psi0.clone() }
    }

    /// `U(t, 0)ψ₀` for nondecreasing `t ≥ 0` across calls.
    fn state_at(&mut self, t: f64) -> Result<ComplexVector> {
        let n = t.floor() as usize;
        while self.kicks_done < n {
            self.kicks_done += 1;
            self.stepper.step(self.kicks_done, &mut self.at_integer)?;
        }
        let s = t - n as f64;
        if s == 0.0 {
            return Ok(self.at_integer.clone());
        }
        Ok(ComplexVector::from_iterator(
            self.at_integer.len(),
            self.at_integer.iter().enumerate().map(|(j, z)| {
                let p = self.params.momentum(j) as f64;
                z * cis(-s * p * p)
            }),
        ))
    }
}

/// Samples `U(t_k, 0)ψ₀` on the grid.
pub fn propagate(
    model: &ModelSpec,
    psi0: &ComplexVector,
    grid: &TimeGrid,
    options: &PropagationOptions,
) -> Result<OrbitSample> {
    if psi0.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: psi0.len() });
    }
    if !is_finite_vector(psi0) {
        return Err(Error::NonFinite { what: "initial state" });
    }
    if options.substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be positive".into()));
    }
    let mut states = Vec::with_capacity(grid.len());
    match resolve_method(model, options.method)? {
        Resolved::Kicked(params) => {
            if grid.t0 < 0.0 {
                return Err(Error::InvalidGrid("kicked models evolve forward from t = 0".into()));
            }
            let mut evo = KickedEvolution::new(&params, psi0);
            for k in 0..grid.len() {
                states.push(evo.state_at(grid.time(k))?);
            }
        }
        Resolved::Autonomous => {
            let eig = hermitian_eig(&model.h0()?)?;
            let c = eig.coefficients(psi0);
            for k in 0..grid.len() {
                states.push(eig.evolve_vector(&c, grid.time(k)));
            }
        }
        Resolved::Exact => {
            for k in 0..grid.len() {
                states.push(model.exact_propagator(grid.time(k))?.apply(psi0));
            }
        }
        Resolved::Stepped => {
            let mut psi = psi0.clone();
            if grid.t0 != 0.0 {
                let n = (grid.t0.abs() / options.max_step).ceil().max(1.0) as usize;
                step_vector(model, &mut psi, 0.0, grid.t0, n)?;
            }
            states.push(psi.clone());
            for k in 0..grid.count {
                step_vector(model, &mut psi, grid.time(k), grid.h, options.substeps)?;
                states.push(psi.clone());
            }
        }
    }
    let n0 = psi0.norm();
    let max_norm_drift = states.iter().fold(0.0_f64, |m, s| m.max((s.norm() - n0).abs()));
    if max_norm_drift > options.max_norm_drift {
        return Err(Error::NormDriftExceeded { drift: max_norm_drift, limit: options.max_norm_drift });
    }
    Ok(OrbitSample { grid: *grid, states, max_norm_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis_vector;
    use crate::models::{AutonomousDiscreteParams, DrivenTwoLevelParams, QuasiperiodicExactParams};

    fn driven() -> ModelSpec {
        ModelSpec::DrivenTwoLevel(DrivenTwoLevelParams::new(1.0, 0.4, 1.3).unwrap())
    }

    fn stepped() -> PropagationOptions {
        PropagationOptions { method: Method::Stepped, ..Default::default() }
    }

    #[test]
    fn grid_basics() {
        let g = TimeGrid::from_span(0.0, 10.0, 1e-3).unwrap();
        assert_eq!(g.count, 10_000);
        assert!((g.t1() - 10.0).abs() < 1e-12);
        assert_eq!(g.index_of(5.0).unwrap(), 5000);
        assert!(matches!(g.index_of(5.0004), Err(Error::TimeNotOnGrid { .. })));
        assert!(TimeGrid::new(0.0, 0.0, 3).is_err());
        assert!(TimeGrid::from_span(0.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn midpoint_on_autonomous_is_exact() {
        let m = ModelSpec::AutonomousDiscrete(AutonomousDiscreteParams::new(vec![0.0, 0.5, 2.0], 0.3).unwrap());
        let u = step_midpoint(&m, 1.7, 0.25).unwrap();
        let e = m.exact_propagator(0.25).unwrap();
        assert!(u.distance(&e) < 1e-14);
    }

    #[test]
    fn midpoint_single_step_matches_closed_form() {
        let m = driven();
        let u = step_midpoint(&m, 0.0, 1e-3).unwrap();
        assert!(u.distance(&m.exact_propagator(1e-3).unwrap()) <= 1e-8);
    }

    #[test]
    fn stepped_driven_accuracy_and_order() {
        let m = driven();
        let psi0 = basis_vector(2, 0);
        let err = |h: f64| {
            let g = TimeGrid::from_span(0.0, 10.0, h).unwrap();
            let orbit = propagate(&m, &psi0, &g, &stepped()).unwrap();
            let exact = m.exact_propagator(10.0).unwrap().apply(&psi0);
            (orbit.states.last().unwrap() - exact).norm()
        };
        let (e1, e2) = (err(2e-3), err(1e-3));
        assert!(e2 <= 1e-5, "error {e2:e}");
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn autonomous_eigenvector_phases() {
        let m = ModelSpec::AutonomousDiscrete(AutonomousDiscreteParams::new(vec![0.0, 1.0, 3.0], 0.0).unwrap());
        let g = TimeGrid::new(0.0, 0.37, 50).unwrap();
        let orbit = propagate(&m, &basis_vector(3, 1), &g, &Default::default()).unwrap();
        for (k, s) in orbit.states.iter().enumerate() {
            let expect = basis_vector(3, 1) * cis(-g.time(k));
            assert!((s - expect).norm() <= 1e-10);
        }
    }

    #[test]
    fn quasiperiodic_orbit_closed_form() {
        let p = QuasiperiodicExactParams::new((5f64.sqrt() - 1.0) / 2.0, 1.0, 0.3).unwrap();
        let m = ModelSpec::QuasiperiodicExact(p);
        let g = TimeGrid::new(-20.0, 0.5, 200).unwrap();
        let orbit = propagate(&m, &basis_vector(2, 0), &g, &Default::default()).unwrap();
        for (k, s) in orbit.states.iter().enumerate() {
            let expect = cis(p.closed_form_phase(g.time(k)));
            assert!((s[0] - expect).norm() < 1e-10 && s[1].norm() == 0.0);
        }
    }

    #[test]
    fn stepped_lead_in_to_nonzero_start() {
        let m = driven();
        let psi0 = basis_vector(2, 1);
        let g = TimeGrid::new(-1.5, 0.01, 100).unwrap();
        let orbit = propagate(&m, &psi0, &g, &stepped()).unwrap();
        for k in [0, 50, 100] {
            let exact = m.exact_propagator(g.time(k)).unwrap().apply(&psi0);
            assert!((&orbit.states[k] - exact).norm() < 1e-5);
        }
    }

    #[test]
    fn kicked_grid_between_and_on_kicks() {
        let params = KickedLinearParams::new(4, crate::models::KickSequence::One).unwrap();
        let m = ModelSpec::KickedLinear(params.clone());
        let psi0 = basis_vector(9, 4);
        let g = TimeGrid::new(0.0, 0.5, 6).unwrap();
        let orbit = propagate(&m, &psi0, &g, &Default::default()).unwrap();
        let st = KickStepper::new(&params);
        let mut psi = psi0.clone();
        for n in 1..=3 {
            st.step(n, &mut psi).unwrap();
            assert!((&orbit.states[2 * n] - &psi).norm() < 1e-13);
        }
        assert!(orbit.max_norm_drift < 1e-12);
    }

    #[test]
    fn drift_limit_enforced() {
        let m = driven();
        let g = TimeGrid::new(0.0, 0.1, 10).unwrap();
        let opts = PropagationOptions { max_norm_drift: -1.0, ..stepped() };
        assert!(matches!(
            propagate(&m, &basis_vector(2, 0), &g, &opts),
            Err(Error::NormDriftExceeded { .. })
        ));
    }

    #[test]
    fn method_errors() {
        let p = QuasiperiodicExactParams::new(0.5, 1.0, 0.0).unwrap();
        let g = TimeGrid::new(0.0, 0.1, 2).unwrap();
        assert!(matches!(
            propagate(&ModelSpec::QuasiperiodicExact(p), &basis_vector(2, 0), &g, &stepped()),
            Err(Error::GeneratorNotAvailable { .. })
        ));
        assert!(matches!(
            propagate(&driven(), &basis_vector(3, 0), &g, &stepped()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
