//! Expectation series over enlarged eigen-expansions and the checks built on
//! them.

use rayon::prelude::*;
use serde::Serialize;

use super::{generalized_floquet_apply, EnlargedSpectrum, EnlargedState, FiberFamily, TorusGrid};
use crate::error::{Error, Result};
use crate::linalg::{cis, ComplexMatrix, ComplexVector, HermitianOperator, C64};

/// `B_{n,m}(A) = (1/q) Σ_j ⟨f_n(θ_j), A f_m(θ_j)⟩`.
pub fn b_matrix(fn_: &EnlargedState, fm: &EnlargedState, probe: &HermitianOperator) -> Result<C64> {
    if fn_.len() != fm.len() || fn_.dim() != fm.dim() {
        return Err(Error::GridMismatch);
    }
    if probe.dim() != fn_.dim() {
        return Err(Error::DimensionMismatch { expected: fn_.dim(), found: probe.dim() });
    }
    let s: C64 = fn_.values().iter().zip(fm.values()).map(|(a, b)| a.dotc(&probe.apply(b))).sum();
    Ok(s / fn_.len() as f64)
}

/// `Σ_{n,m} ā_n a_m e^{−it(λ_m−λ_n)} B_{n,m}` at each time, with the largest
/// discarded imaginary part.
pub fn af_series(a: &[C64], lambda: &[f64], b: &ComplexMatrix, times: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = a.len();
    if lambda.len() != m || b.nrows() != m || b.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: lambda.len().min(b.nrows()) });
    }
    let mut max_im = 0.0_f64;
    let values = times
        .iter()
        .map(|&t| {
            let z = ComplexVector::from_iterator(m, a.iter().zip(lambda).map(|(c, &l)| c * cis(-l * t)));
            let v = z.dotc(&(b * &z));
            max_im = max_im.max(v.im.abs());
            v.re
        })
        .collect();
    Ok((values, max_im))
}

/// `(1/q) Σ_j ⟨U_{θ_j}(t,0) f(θ_j), A U_{θ_j}(t,0) f(θ_j)⟩`, fibres in parallel.
pub fn af_direct(
    f: &EnlargedState,
    fiber: &FiberFamily,
    probe: &HermitianOperator,
    grid: &TorusGrid,
    times: &[f64],
) -> Result<Vec<f64>> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if f.dim() != fiber.dim() || probe.dim() != fiber.dim() {
        return Err(Error::DimensionMismatch { expected: fiber.dim(), found: f.dim() });
    }
    let per_fibre: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let theta = grid.theta(j);
            times
                .iter()
                .map(|&t| {
                    let psi = fiber.evolve(theta, t, f.at(j));
                    probe.expectation(&psi).re
                })
                .collect()
        })
        .collect();
    let q = grid.len() as f64;
    Ok((0..times.len()).map(|k| per_fibre.iter().map(|s| s[k]).sum::<f64>() / q).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AfReport {
    pub q: u64,
    /// Eigen-indices with non-negligible weight.
    pub support: Vec<usize>,
    pub coefficients: Vec<C64>,
    pub eigenvalues: Vec<f64>,
    /// `B_{n,m}` over the support, row-major.
    pub b: Vec<Vec<C64>>,
    pub b_hermiticity_defect: f64,
    pub parseval_defect: f64,
    pub times: Vec<f64>,
    pub series: Vec<f64>,
    pub direct: Vec<f64>,
    pub max_imaginary: f64,
    pub max_discrepancy: f64,
}

/// Both expectation pipelines for one state: the eigen-expansion series and
/// the fibrewise propagation.
pub fn af_report(
    f: &EnlargedState,
    spectrum: &EnlargedSpectrum,
    fiber: &FiberFamily,
    probe: &HermitianOperator,
    grid: &TorusGrid,
    times: &[f64],
) -> Result<AfReport> {
    let all: Vec<C64> = spectrum.states.iter().map(|fn_| fn_.inner(f)).collect::<Result<_>>()?;
    let norm_sq = f.norm_squared();
    let parseval_defect = (all.iter().map(|c| c.norm_sqr()).sum::<f64>() - norm_sq).abs();
    let limit = 1e-10 * norm_sq.max(1.0);
    if parseval_defect > limit {
        return Err(Error::ExpansionResidualTooLarge { residual: parseval_defect, limit });
    }
    let floor = 1e-13 * norm_sq.sqrt().max(1.0);
    let support: Vec<usize> = (0..all.len()).filter(|&n| all[n].norm() > floor).collect();
    let m = support.len();
    let lambdas = spectrum.quasienergies();
    let a: Vec<C64> = support.iter().map(|&n| all[n]).collect();
    let lambda: Vec<f64> = support.iter().map(|&n| lambdas[n]).collect();
    let mut b = ComplexMatrix::zeros(m, m);
    for (r, &n) in support.iter().enumerate() {
        for (c, &k) in support.iter().enumerate() {
            b[(r, c)] = b_matrix(&spectrum.states[n], &spectrum.states[k], probe)?;
        }
    }
    let b_hermiticity_defect = (&b - b.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let (series, max_imaginary) = af_series(&a, &lambda, &b, times)?;
    let direct = af_direct(f, fiber, probe, grid, times)?;
    let max_discrepancy = series.iter().zip(&direct).fold(0.0_f64, |mx, (s, d)| mx.max((s - d).abs()));
    Ok(AfReport {
        q: grid.q,
        support,
        coefficients: a,
        eigenvalues: lambda,
        b: (0..m).map(|r| (0..m).map(|c| b[(r, c)]).collect()).collect(),
        b_hermiticity_defect,
        parseval_defect,
        times: times.to_vec(),
        series,
        direct,
        max_imaginary,
        max_discrepancy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem410Report {
    pub periods: usize,
    pub eigen_residual: f64,
    /// `max_{j,k} ‖U_{θ_j}(kT₂,0) f(θ_j) − e^{−iλkT₂} f(θ_{j+kp})‖`.
    pub max_defect: f64,
    /// `sup |⟨ψ, H_θ ψ⟩|` over the sampled fibre orbits, when a generator exists.
    pub energy_sup: Option<f64>,
    /// `sup ‖∂_t g_t‖`, the constant speed of the linear flow.
    pub flow_speed: f64,
}

/// Fibrewise eigen-covariance `U_θ(t,0)f(θ) = e^{−iλt} f(g_tθ)` at `t = kT₂`.
pub fn theorem410_check(
    f: &EnlargedState,
    lambda: f64,
    fiber: &FiberFamily,
    grid: &TorusGrid,
    periods: usize,
) -> Result<Theorem410Report> {
    let u1 = fiber.u1_samples(grid)?;
    let uf = generalized_floquet_apply(&u1, grid.shift(), f)?;
    let n2 = f.norm_squared();
    if n2 == 0.0 {
        return Err(Error::NotAnEigenvector { residual: f64::INFINITY });
    }
    let mu = f.inner(&uf)? / n2;
    let resid = EnlargedState::new(f.values().iter().zip(uf.values()).map(|(a, b)| b - a * mu).collect())?;
    let eigen_residual = resid.norm() / n2.sqrt();
    if eigen_residual > 1e-8 {
        return Err(Error::NotAnEigenvector { residual: eigen_residual });
    }
    let q = grid.len();
    let t2 = fiber.period();
    let has_generator = fiber.hamiltonian(0.0, 0.0).is_ok();
    let (defect, energy) = (0..q)
        .into_par_iter()
        .map(|j| -> Result<(f64, f64)> {
            let theta = grid.theta(j);
            let h = if has_generator { Some(fiber.hamiltonian(theta, 0.0)?) } else { None };
            let mut worst = 0.0_f64;
            let mut e_sup = 0.0_f64;
            for k in 0..=periods {
                let t = k as f64 * t2;
                let psi = fiber.evolve(theta, t, f.at(j));
                let target = f.at((j + k * grid.shift()) % q) * cis(-lambda * t);
                worst = worst.max((&psi - target).norm());
                if let Some(h) = &h {
                    e_sup = e_sup.max(h.expectation(&psi).re.abs());
                }
            }
            Ok((worst, e_sup))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0_f64, 0.0_f64), |(a, b), (c, d)| (a.max(c), b.max(d)));
    Ok(Theorem410Report {
        periods,
        eigen_residual,
        max_defect: defect,
        energy_sup: has_generator.then_some(energy),
        flow_speed: fiber.flow_speed(),
    })
}

/// Largest centred-difference `‖∂_θ f‖` on the periodic grid.
pub fn theta_derivative_sup(f: &EnlargedState) -> f64 {
    let q = f.len();
    if q < 3 {
        return 0.0;
    }
    let h = std::f64::consts::TAU / q as f64;
    (0..q).map(|j| (f.at((j + 1) % q) - f.at((j + q - 1) % q)).norm() / (2.0 * h)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummabilityTrend {
    Finite,
    ConvergentTrend,
    DivergentTrend,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub terms: usize,
    pub partial_sum: f64,
    /// `(S_n − S_{n/2}) / (S_{n/2} − S_{n/4})`, when defined.
    pub tail_ratio: Option<f64>,
    pub trend: SummabilityTrend,
}

/// Partial sums of `Σ_j |a_j| (|λ_j| + sup_θ‖∂_θ f_j‖)` with a trend flag from
/// successive dyadic truncations.
pub fn summability_bound(a: &[C64], lambda: &[f64], derivative_sups: &[f64]) -> Result<SummabilityReport> {
    let n = a.len();
    if lambda.len() != n || derivative_sups.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: lambda.len().min(derivative_sups.len()) });
    }
    let terms: Vec<f64> = (0..n).map(|j| a[j].norm() * (lambda[j].abs() + derivative_sups[j])).collect();
    let partial = |k: usize| terms[..k].iter().sum::<f64>();
    let total = partial(n);
    if terms[n / 2..].iter().all(|&t| t == 0.0) {
        return Ok(SummabilityReport { terms: n, partial_sum: total, tail_ratio: None, trend: SummabilityTrend::Finite });
    }
    let (half, quarter) = (partial(n / 2), partial(n / 4));
    let tail_ratio = (n >= 4 && half > quarter).then(|| (total - half) / (half - quarter));
    let trend = match tail_ratio {
        Some(r) if r <= 0.5 => SummabilityTrend::ConvergentTrend,
        Some(r) if r >= 0.9 => SummabilityTrend::DivergentTrend,
        _ => SummabilityTrend::Indeterminate,
    };
    Ok(SummabilityReport { terms: n, partial_sum: total, tail_ratio, trend })
}

#[cfg(test)]
mod tests {
    use super::super::enlarged_spectrum;
    use super::*;
    use crate::diagnostics::{ap_scan, stability_verdict, sample_orbit, ApVerdict, EnergySeries, StabilityThresholds,
        StabilityVerdict};
    use crate::linalg::{basis_vector, c64};
    use crate::models::QuasiperiodicExactParams;
    use crate::propagator::TimeGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy() -> (FiberFamily, TorusGrid, EnlargedSpectrum, HermitianOperator) {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = ComplexMatrix::from_fn(3, 3, |_, _| c64(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)));
        let h = HermitianOperator::new((&m + m.adjoint()).scale(0.5) + ComplexMatrix::identity(3, 3).scale(1.5))
            .unwrap();
        let fiber = FiberFamily::constant(h, 2.0).unwrap();
        let grid = TorusGrid::trivial(4).unwrap();
        let spec = enlarged_spectrum(&fiber.u1_samples(&grid).unwrap(), 0, fiber.period()).unwrap();
        let probe = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 2.0]).unwrap();
        (fiber, grid, spec, probe)
    }

    #[test]
    fn b_matrix_examples() {
        let phi = ComplexVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let f = EnlargedState::constant(5, &phi).unwrap();
        let a = HermitianOperator::from_real_diagonal(&[1.0, -2.0]).unwrap();
        assert!((b_matrix(&f, &f, &a).unwrap() - a.expectation(&phi)).norm() < 1e-15);
        let e0 = EnlargedState::constant(5, &basis_vector(2, 0)).unwrap();
        let e1 = EnlargedState::constant(5, &basis_vector(2, 1)).unwrap();
        assert_eq!(b_matrix(&e0, &e1, &HermitianOperator::identity(2)).unwrap(), c64(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rnd = |rng: &mut ChaCha8Rng| {
            EnlargedState::new(
                (0..5).map(|_| ComplexVector::from_fn(2, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))).collect(),
            )
            .unwrap()
        };
        let (g, h) = (rnd(&mut rng), rnd(&mut rng));
        let a = HermitianOperator::new(crate::linalg::sigma_y() + crate::linalg::sigma_x()).unwrap();
        assert!((b_matrix(&g, &h, &a).unwrap() - b_matrix(&h, &g, &a).unwrap().conj()).norm() <= 1e-12);
        let short = EnlargedState::constant(4, &phi).unwrap();
        assert!(matches!(b_matrix(&f, &short, &a), Err(Error::GridMismatch)));
    }

    #[test]
    fn af_series_examples() {
        let b = ComplexMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.3, 0.4), c64(0.3, -0.4), c64(2.0, 0.0)]);
        let (one, _) = af_series(&[c64(1.0, 0.0)], &[0.7], &b.view((0, 0), (1, 1)).into_owned(), &[0.0, 3.0]).unwrap();
        assert!(one.iter().all(|v| (v - 1.0).abs() < 1e-15));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = [c64(s, 0.0), c64(s, 0.0)];
        let lam = [0.2, 1.5];
        let times: Vec<f64> = (0..50).map(|k| 0.37 * k as f64).collect();
        let (v, im) = af_series(&a, &lam, &b, &times).unwrap();
        assert!(im < 1e-14);
        for (t, v) in times.iter().zip(v) {
            let cross = (cis(-t * (lam[1] - lam[0])) * b[(0, 1)]).re;
            assert!((v - (0.5 + 1.0 + cross)).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_fibre_static_series() {
        let (fiber, grid, _, _) = toy();
        let FiberFamily::Constant { eig, .. } = &fiber else { unreachable!() };
        let probe = HermitianOperator::from_real_diagonal(&[1.0, 3.0, -1.0]).unwrap();
        let phi = eig.vector(1);
        let f = EnlargedState::constant(grid.len(), &phi).unwrap();
        let times: Vec<f64> = (0..20).map(|k| k as f64 * 0.9).collect();
        let d = af_direct(&f, &fiber, &probe, &grid, &times).unwrap();
        let e = probe.expectation(&phi).re;
        assert!(d.iter().all(|v| (v - e).abs() < 1e-12));
    }

    #[test]
    fn equality_chain_on_toy() {
        let (fiber, grid, spec, probe) = toy();
        let f = EnlargedState::new(
            spec.states[1].values().iter().zip(spec.states[7].values()).map(|(a, b)| a * c64(0.6, 0.0) + b * c64(0.0, 0.8)).collect(),
        )
        .unwrap();
        let times: Vec<f64> = (0..1000).map(|k| 0.05 * k as f64).collect();
        let r = af_report(&f, &spec, &fiber, &probe, &grid, &times).unwrap();
        assert!(r.max_discrepancy <= 1e-8, "{}", r.max_discrepancy);
        assert!(r.b_hermiticity_defect <= 1e-12);
        assert!(r.max_imaginary <= 1e-10);
        let t0 = r.series[0];
        let direct0: f64 = f.values().iter().map(|v| probe.expectation(v).re).sum::<f64>() / f.len() as f64;
        assert!((t0 - direct0).abs() < 1e-12);
    }

    #[test]
    fn finite_series_is_almost_periodic() {
        let b = ComplexMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.3, 0.4), c64(0.3, -0.4), c64(2.0, 0.0)]);
        let a = [c64(0.6, 0.0), c64(0.0, 0.8)];
        let grid = TimeGrid::new(0.0, 0.01, 20_000).unwrap();
        let (v, _) = af_series(&a, &[0.1, 1.1], &b, &grid.times()).unwrap();
        let orbit = sample_orbit(&grid, |t| {
            let k = grid.index_of(t).unwrap();
            ComplexVector::from_element(1, c64(v[k], 0.0))
        })
        .unwrap();
        assert!(matches!(ap_scan(&orbit, 0.05, 100.0).unwrap().verdict, ApVerdict::ApConsistent { .. }));
        let times: Vec<f64> = (1..=10_000).map(|k| 0.1 * k as f64).collect();
        let (v, _) = af_series(&a, &[0.1, 1.1], &b, &times).unwrap();
        let series = EnergySeries::from_values(times, v).unwrap();
        assert!(matches!(
            stability_verdict(&series, &StabilityThresholds::default()).unwrap(),
            StabilityVerdict::BoundedConsistent { .. }
        ));
    }

    #[test]
    fn theorem410_toy_and_negative_control() {
        let (fiber, grid, spec, _) = toy();
        let lam = spec.quasienergies()[2];
        let r = theorem410_check(&spec.states[2], lam, &fiber, &grid, 100).unwrap();
        assert!(r.max_defect <= 1e-8, "{}", r.max_defect);
        assert!(r.energy_sup.is_some());
        let shifted = lam + std::f64::consts::TAU / (2.0 * fiber.period());
        let bad = theorem410_check(&spec.states[2], shifted, &fiber, &grid, 100).unwrap();
        assert!(bad.max_defect > 1.0);
        let mixed = EnlargedState::new(
            spec.states[0].values().iter().zip(spec.states[11].values()).map(|(a, b)| a + b).collect(),
        )
        .unwrap();
        if (spec.phases[0] - spec.phases[11]).abs() > 1e-6 {
            assert!(matches!(theorem410_check(&mixed, lam, &fiber, &grid, 3), Err(Error::NotAnEigenvector { .. })));
        }
    }

    #[test]
    fn theorem410_identity_fibre() {
        let fiber = FiberFamily::constant(HermitianOperator::zeros(2), 1.0).unwrap();
        let grid = TorusGrid::trivial(3).unwrap();
        let f = EnlargedState::constant(3, &basis_vector(2, 0)).unwrap();
        assert_eq!(theorem410_check(&f, 0.0, &fiber, &grid, 10).unwrap().max_defect, 0.0);
    }

    #[test]
    fn quasiperiodic_enlarged_pipeline() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let fiber = FiberFamily::Quasiperiodic(QuasiperiodicExactParams::new(alpha, 1.0, 0.0).unwrap());
        let grid = TorusGrid::convergent(alpha, 13).unwrap();
        let spec = enlarged_spectrum(&fiber.u1_samples(&grid).unwrap(), grid.shift(), fiber.period()).unwrap();
        assert_eq!(spec.phases.len(), 26);
        let f = EnlargedState::constant(13, &ComplexVector::from_vec(vec![c64(0.6, 0.0), c64(0.8, 0.0)])).unwrap();
        let times: Vec<f64> = (0..10).map(|k| k as f64 * fiber.period()).collect();
        let r = af_report(&f, &spec, &fiber, &HermitianOperator::new(crate::linalg::sigma_x()).unwrap(), &grid, &times).unwrap();
        assert!(r.b_hermiticity_defect <= 1e-12);
        assert!(r.max_discrepancy.is_finite());
    }

    #[test]
    fn summability_examples() {
        let a = [c64(0.5, 0.0), c64(0.25, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)];
        let r = summability_bound(&a, &[1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.trend, SummabilityTrend::Finite);
        assert!((r.partial_sum - (0.5 + 0.75)).abs() < 1e-15);
        let n = 4096;
        let lam: Vec<f64> = (1..=n).map(|j| j as f64).collect();
        let harm: Vec<C64> = (1..=n).map(|j| c64(1.0 / (j * j) as f64, 0.0)).collect();
        assert_eq!(summability_bound(&harm, &lam, &vec![0.0; n]).unwrap().trend, SummabilityTrend::DivergentTrend);
        let geo: Vec<C64> = (1..=64).map(|j| c64(0.5f64.powi(j), 0.0)).collect();
        let r = summability_bound(&geo, &lam[..64], &vec![1.0; 64]).unwrap();
        assert_eq!(r.trend, SummabilityTrend::ConvergentTrend);
    }

    #[test]
    fn theta_derivative_of_fourier_mode() {
        let q = 1024;
        let f = EnlargedState::new(
            (0..q).map(|j| basis_vector(1, 0) * cis(3.0 * std::f64::consts::TAU * j as f64 / q as f64)).collect(),
        )
        .unwrap();
        assert!((theta_derivative_sup(&f) - 3.0).abs() < 1e-3);
    }
}
