use super::{resolve_method, step_midpoint, KickedEvolution, PropagationOptions, Resolved, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, cis, hermitian_eig, polar_unitarize, ComplexMatrix, ComplexVector, UnitaryOperator};
use crate::models::{floor_div, KickedLinearParams, ModelSpec};
use crate::tolerance::Tolerances;

/// `U(t_k, 0)` on a grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorCache {
    pub grid: TimeGrid,
    pub unitaries: Vec<UnitaryOperator>,
}

fn kicked_columns(params: &KickedLinearParams, times: &[f64]) -> Result<Vec<UnitaryOperator>> {
    let dim = params.dim();
    let mut mats = vec![ComplexMatrix::zeros(dim, dim); times.len()];
    for c in 0..dim {
        let mut evo = KickedEvolution::new(params, &basis_vector(dim, c));
        for (k, &t) in times.iter().enumerate() {
            mats[k].set_column(c, &evo.state_at(t)?);
        }
    }
    Ok(mats.into_iter().map(UnitaryOperator::from_parts).collect())
}

/// Accumulates midpoint steps `U ← S_j U`, re-unitarizing every `every` steps.
fn accumulate(
    model: &ModelSpec,
    u: &mut ComplexMatrix,
    t: f64,
    span: f64,
    n: usize,
    every: usize,
    counter: &mut usize,
) -> Result<()> {
    let h = span / n as f64;
    for j in 0..n {
        let s = step_midpoint(model, t + j as f64 * h, h)?;
        *u = s.matrix() * &*u;
        *counter += 1;
        if every > 0 && (*counter).is_multiple_of(every) {
            *u = polar_unitarize(u)?.into_matrix();
        }
    }
    Ok(())
}

impl PropagatorCache {
    pub fn build(model: &ModelSpec, grid: &TimeGrid, options: &PropagationOptions) -> Result<Self> {
        if grid.t0 != 0.0 {
            return Err(Error::InvalidGrid("propagator caches start at t = 0".into()));
        }
        let times = grid.times();
        let unitaries = match resolve_method(model, options.method)? {
            Resolved::Kicked(p) => kicked_columns(&p, &times)?,
            Resolved::Autonomous => {
                let eig = hermitian_eig(&model.h0()?)?;
                times.iter().map(|&t| eig.evolution(t)).collect()
            }
            Resolved::Exact => times.iter().map(|&t| model.exact_propagator(t)).collect::<Result<_>>()?,
            Resolved::Stepped => {
                let dim = model.dim();
                let mut u = ComplexMatrix::identity(dim, dim);
                let mut out = vec![UnitaryOperator::identity(dim)];
                let mut counter = 0;
                for k in 0..grid.count {
                    accumulate(model, &mut u, times[k], grid.h, options.substeps, options.reunitarize_every, &mut counter)?;
                    out.push(UnitaryOperator::from_parts(u.clone()));
                }
                out
            }
        };
        Ok(Self { grid: *grid, unitaries })
    }

    pub fn get(&self, t: f64) -> Result<&UnitaryOperator> {
        Ok(&self.unitaries[self.grid.index_of(t)?])
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// Largest unitarity defect over the cache.
    pub fn max_unitarity_defect(&self) -> f64 {
        self.unitaries.iter().fold(0.0, |m, u| m.max(u.unitarity_defect()))
    }
}

/// `U(t, 0)` by whichever route the model supports.
pub fn propagator_at(model: &ModelSpec, t: f64, options: &PropagationOptions) -> Result<UnitaryOperator> {
    if !t.is_finite() {
        return Err(Error::NonFinite { what: "time" });
    }
    match resolve_method(model, options.method)? {
        Resolved::Kicked(p) => {
            if t < 0.0 {
                return Err(Error::InvalidGrid("kicked models evolve forward from t = 0".into()));
            }
            Ok(kicked_columns(&p, &[t])?.pop().expect("one time"))
        }
        Resolved::Autonomous => hermitian_eig(&model.h0()?).map(|e| e.evolution(t)),
        Resolved::Exact => model.exact_propagator(t),
        Resolved::Stepped => {
            let dim = model.dim();
            let mut u = ComplexMatrix::identity(dim, dim);
            if t != 0.0 {
                let n = (t.abs() / options.max_step).ceil().max(1.0) as usize;
                let mut counter = 0;
                accumulate(model, &mut u, 0.0, t, n, options.reunitarize_every, &mut counter)?;
            }
            Ok(UnitaryOperator::from_parts(u))
        }
    }
}

/// One-period propagator `U(T, 0)`.
pub fn monodromy(model: &ModelSpec, period: f64, options: &PropagationOptions) -> Result<UnitaryOperator> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    propagator_at(model, period, options)
}

/// `‖U(t,0)U(s,0)⁻¹ − U(t,0)U(r,0)⁻¹·U(r,0)U(s,0)⁻¹‖_F` with inverses taken
/// as adjoints, so the value measures accumulated non-unitarity.
pub fn cocycle_defect(cache: &PropagatorCache, t: f64, r: f64, s: f64) -> Result<f64> {
    let (ut, ur, us) = (cache.get(t)?.matrix(), cache.get(r)?.matrix(), cache.get(s)?.matrix());
    let direct = ut * us.adjoint();
    let routed = (ut * ur.adjoint()) * (ur * us.adjoint());
    Ok((direct - routed).norm())
}

/// `U(t, 0)ξ = U(s, 0) e^{−inα} ξ` for `t = nT + s`, with the cache covering
/// exactly one period `[0, T]`.
pub fn floquet_orbit(
    cache: &PropagatorCache,
    floquet: &UnitaryOperator,
    alpha: f64,
    xi: &ComplexVector,
    t: f64,
) -> Result<ComplexVector> {
    let residual = (floquet.apply(xi) - xi * cis(-alpha)).norm();
    if residual > Tolerances::DEFAULT.eigen_residual {
        return Err(Error::NotAnEigenvector { residual });
    }
    let period = cache.grid.t1();
    let (n, s) = floor_div(t, period);
    let us = cache.get(s)?;
    Ok(us.apply(xi) * cis(-(n as f64) * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitary_eigenphases;
    use crate::models::{AutonomousDiscreteParams, DrivenTwoLevelParams, QuasiperiodicExactParams};
    use crate::propagator::{propagate, Method};

    fn driven() -> ModelSpec {
        ModelSpec::DrivenTwoLevel(DrivenTwoLevelParams::new(1.0, 0.4, 1.3).unwrap())
    }

    fn stepped() -> PropagationOptions {
        PropagationOptions { method: Method::Stepped, ..Default::default() }
    }

    #[test]
    fn cocycle_trivial_and_closed_form() {
        let p = QuasiperiodicExactParams::new(0.6180339887498949, 1.0, 0.5).unwrap();
        let g = TimeGrid::new(0.0, 0.1, 100).unwrap();
        let cache = PropagatorCache::build(&ModelSpec::QuasiperiodicExact(p), &g, &Default::default()).unwrap();
        assert!(cocycle_defect(&cache, 3.0, 3.0, 3.0).unwrap() <= 1e-15);
        assert!(cocycle_defect(&cache, 9.0, 2.5, 0.7).unwrap() <= 1e-12);
    }

    #[test]
    fn cocycle_stepped() {
        let g = TimeGrid::from_span(0.0, 10.0, 1e-3).unwrap();
        let cache = PropagatorCache::build(&driven(), &g, &stepped()).unwrap();
        assert!(cocycle_defect(&cache, 10.0, 5.0, 0.0).unwrap() <= 1e-8);
        assert!(matches!(cocycle_defect(&cache, 11.0, 5.0, 0.0), Err(Error::TimeNotOnGrid { .. })));
    }

    #[test]
    fn periodic_covariance_on_stepped_grid() {
        let m = driven();
        let t_per = m.period().unwrap();
        let g = TimeGrid::with_count(0.0, 2.0 * t_per, 10_000).unwrap();
        let cache = PropagatorCache::build(&m, &g, &stepped()).unwrap();
        let ut = cache.unitaries[5000].matrix();
        for k in (0..=5000).step_by(500) {
            let shifted = cache.unitaries[k + 5000].matrix() * ut.adjoint();
            assert!((shifted - cache.unitaries[k].matrix()).norm() <= 1e-7, "k={k}");
        }
    }

    #[test]
    fn monodromy_examples() {
        let a = AutonomousDiscreteParams::new(vec![0.0, 0.7], 0.0).unwrap();
        let m = ModelSpec::AutonomousDiscrete(a.clone());
        let u = monodromy(&m, 2.0, &Default::default()).unwrap();
        assert!(u.distance(&crate::linalg::expm_i_hermitian(a.h0(), 2.0).unwrap()) < 1e-14);

        let p = QuasiperiodicExactParams::new(0.6180339887498949, 1.0, 1.1).unwrap();
        let u = monodromy(&ModelSpec::QuasiperiodicExact(p), p.t2(), &Default::default()).unwrap();
        assert!(u.distance(&QuasiperiodicExactParams::u1(1.1)) < 1e-14);

        let ModelSpec::DrivenTwoLevel(d) = driven() else { unreachable!() };
        let t_per = d.period();
        let stepped_u = monodromy(&driven(), t_per, &stepped()).unwrap();
        let expect = -d.rotating_propagator(t_per);
        assert!((stepped_u.matrix() - expect).norm() < 1e-6);
    }

    #[test]
    fn floquet_orbit_factorization() {
        let m = driven();
        let t_per = m.period().unwrap();
        let g = TimeGrid::with_count(0.0, t_per, 3000).unwrap();
        let cache = PropagatorCache::build(&m, &g, &stepped()).unwrap();
        let uf = cache.unitaries.last().unwrap().clone();
        let spec = unitary_eigenphases(&uf).unwrap();
        let xi = spec.vectors.column(0).into_owned();
        let alpha = spec.phases[0];
        let at_t = floquet_orbit(&cache, &uf, alpha, &xi, t_per).unwrap();
        assert!((at_t - &xi * cis(-alpha)).norm() < 1e-9);
        let back = floquet_orbit(&cache, &uf, alpha, &xi, -t_per).unwrap();
        assert!((back - &xi * cis(alpha)).norm() < 1e-9);

        let t = 7.0 * t_per + t_per / 3.0;
        let direct = propagate(&m, &xi, &TimeGrid::with_count(0.0, t, 22_000).unwrap(), &stepped()).unwrap();
        let fo = floquet_orbit(&cache, &uf, alpha, &xi, t).unwrap();
        assert!((fo - direct.states.last().unwrap()).norm() < 1e-6);

        assert!(matches!(
            floquet_orbit(&cache, &uf, alpha + 0.1, &xi, t),
            Err(Error::NotAnEigenvector { .. })
        ));
    }

    #[test]
    fn kicked_cache_matches_vector_propagation() {
        let params = KickedLinearParams::new(3, crate::models::KickSequence::One).unwrap();
        let m = ModelSpec::KickedLinear(params);
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        let cache = PropagatorCache::build(&m, &g, &Default::default()).unwrap();
        let psi0 = basis_vector(7, 2);
        let orbit = propagate(&m, &psi0, &g, &Default::default()).unwrap();
        for k in 0..g.len() {
            assert!((cache.unitaries[k].apply(&psi0) - &orbit.states[k]).norm() < 1e-13);
        }
        assert!(cache.max_unitarity_defect() < 1e-12);
    }
}
