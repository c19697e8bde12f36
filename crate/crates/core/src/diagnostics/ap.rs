//! Almost-period scanning and greedy ε-nets over sampled orbits.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagator::OrbitSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ApVerdict {
    /// Every window of length `l` in `[0, τ_max]` holds an ε-almost period.
    ApConsistent { l: f64 },
    ViolatingWitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApWitness {
    pub tau: f64,
    pub t: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApReport {
    pub epsilon: f64,
    pub horizon: (f64, f64),
    pub tau_step: f64,
    pub tau_max: f64,
    /// Runs of consecutive grid shifts `[τ_a, τ_b]` that are ε-almost periods.
    pub almost_period_intervals: Vec<(f64, f64)>,
    pub almost_period_count: usize,
    /// Largest gap between consecutive almost periods in `[0, τ_max]`,
    /// endpoints included.
    pub max_gap: f64,
    pub verdict: ApVerdict,
    pub witness: Option<ApWitness>,
    /// Largest one-step change `‖ψ(t_{k+1}) − ψ(t_k)‖` seen on the grid.
    pub max_step_change: f64,
}

/// `sup_j ‖ψ_{j+k} − ψ_j‖` over the overlap window, stopping early once the
/// running maximum exceeds `stop`.
fn shift_deviation(orbit: &OrbitSample, k: usize, stop: f64) -> (f64, usize) {
    let n = orbit.len();
    let mut worst = 0.0;
    let mut at = 0;
    for j in 0..n - k {
        let d = (&orbit.states[j + k] - &orbit.states[j]).norm();
        if d > worst {
            worst = d;
            at = j;
            if worst > stop {
                break;
            }
        }
    }
    (worst, at)
}

/// ε-almost-period scan over grid shifts `τ = k·h ≤ τ_max`.
///
/// The orbit is declared AP-consistent with `L = max_gap + h` when the
/// largest almost-period gap fits twice into `[0, τ_max]`; otherwise the
/// centre of the largest gap is reported as a violating witness with its full
/// sampled deviation.
pub fn ap_scan(orbit: &OrbitSample, epsilon: f64, tau_max: f64) -> Result<ApReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let grid = orbit.grid;
    let horizon = grid.t1() - grid.t0;
    if !(tau_max > 0.0) || tau_max > 0.5 * horizon * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "tau_max must lie in (0, T/2] for horizon T = {horizon}, got {tau_max}"
        )));
    }
    let max_step_change =
        orbit.states.windows(2).map(|w| (&w[1] - &w[0]).norm()).fold(0.0, f64::max);
    if max_step_change > epsilon / 4.0 {
        return Err(Error::GridTooCoarse(format!(
            "one-step change {max_step_change:e} exceeds ε/4 = {:e}; refine h",
            epsilon / 4.0
        )));
    }
    let h = grid.h;
    let k_max = ((tau_max / h) + 1e-9).floor() as usize;
    let is_ap: Vec<bool> = (1..=k_max)
        .into_par_iter()
        .map(|k| shift_deviation(orbit, k, epsilon).0 <= epsilon)
        .collect();

    let mut intervals = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, &ok) in is_ap.iter().enumerate() {
        let k = i + 1;
        match (ok, run_start) {
            (true, None) => run_start = Some(k),
            (false, Some(s)) => {
                intervals.push((s as f64 * h, (k - 1) as f64 * h));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        intervals.push((s as f64 * h, k_max as f64 * h));
    }
    let count = is_ap.iter().filter(|&&b| b).count();

    // τ = 0 is always an almost period; τ_max closes the last gap.
    let mut marks: Vec<f64> = vec![0.0];
    marks.extend(is_ap.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| (i + 1) as f64 * h));
    marks.push(tau_max);
    let (mut max_gap, mut gap_at) = (0.0, (0.0, tau_max));
    for w in marks.windows(2) {
        if w[1] - w[0] > max_gap {
            max_gap = w[1] - w[0];
            gap_at = (w[0], w[1]);
        }
    }
    let (verdict, witness) = if max_gap > 0.5 * tau_max {
        let k = ((0.5 * (gap_at.0 + gap_at.1) / h).round() as usize).clamp(1, k_max.max(1));
        let (deviation, j) = shift_deviation(orbit, k, f64::INFINITY);
        (ApVerdict::ViolatingWitness, Some(ApWitness { tau: k as f64 * h, t: grid.time(j), deviation }))
    } else {
        (ApVerdict::ApConsistent { l: max_gap + h }, None)
    };
    Ok(ApReport {
        epsilon,
        horizon: (grid.t0, grid.t1()),
        tau_step: h,
        tau_max,
        almost_period_intervals: intervals,
        almost_period_count: count,
        max_gap,
        verdict,
        witness,
        max_step_change,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringReport {
    pub epsilon: f64,
    pub horizons: Vec<f64>,
    pub counts: Vec<usize>,
    pub saturated: bool,
    /// Smallest `T*` with `N(ε, 2T*) = N(ε, T*)`.
    pub saturation_horizon: Option<f64>,
}

/// Greedy ε-net in time order: the first sample farther than ε from every
/// centre becomes a centre. The net over a prefix is the prefix of the net,
/// so one pass yields `N(ε, T)` for all nested horizons.
pub fn covering_number(orbit: &OrbitSample, epsilon: f64, horizons: &[f64]) -> Result<CoveringReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if horizons.is_empty() || horizons.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("horizons must be a non-empty nondecreasing list".into()));
    }
    let grid = orbit.grid;
    let span = grid.t1() - grid.t0;
    if horizons.iter().any(|&t| t < 0.0 || t > span * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!("horizons must lie within [0, {span}]")));
    }
    let mut centres: Vec<usize> = Vec::new();
    let mut counts = Vec::with_capacity(horizons.len());
    let mut next = 0;
    for &t in horizons {
        let last = (((t / grid.h) + 1e-9).floor() as usize).min(grid.count);
        while next <= last {
            let psi = &orbit.states[next];
            if !centres.iter().any(|&c| (&orbit.states[c] - psi).norm() <= epsilon) {
                centres.push(next);
            }
            next += 1;
        }
        counts.push(centres.len());
    }
    let mut saturation_horizon = None;
    'outer: for (i, &t) in horizons.iter().enumerate() {
        for (j, &u) in horizons.iter().enumerate().skip(i + 1) {
            if (u - 2.0 * t).abs() <= 1e-9 * u.max(1.0) && counts[j] == counts[i] {
                saturation_horizon = Some(t);
                break 'outer;
            }
        }
    }
    Ok(CoveringReport {
        epsilon,
        horizons: horizons.to_vec(),
        counts,
        saturated: saturation_horizon.is_some(),
        saturation_horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, cis, ComplexVector};
    use crate::propagator::TimeGrid;
    use std::f64::consts::TAU;

    fn orbit_of<F: Fn(f64) -> ComplexVector>(grid: TimeGrid, f: F) -> OrbitSample {
        OrbitSample::from_states(grid, (0..grid.len()).map(|k| f(grid.time(k))).collect()).unwrap()
    }

    #[test]
    fn single_frequency_periods() {
        let grid = TimeGrid::new(0.0, 0.01, 6000).unwrap();
        let phi = basis_vector(2, 0);
        let orbit = orbit_of(grid, |t| &phi * cis(-t));
        let r = ap_scan(&orbit, 0.1, 30.0).unwrap();
        assert!(matches!(r.verdict, ApVerdict::ApConsistent { l } if l <= TAU + 0.01 + 1e-12));
        assert!(r.max_gap <= TAU + 1e-9);
        for k in 1..=4 {
            let tau = k as f64 * TAU;
            assert!(r.almost_period_intervals.iter().any(|&(a, b)| a <= tau + 0.01 && tau - 0.01 <= b));
        }
    }

    #[test]
    fn quadratic_phase_is_a_witness() {
        let grid = TimeGrid::new(0.0, 0.002, 50_000).unwrap();
        let orbit = orbit_of(grid, |t| basis_vector(1, 0) * cis(t * t / 4.0));
        let r = ap_scan(&orbit, 0.5, 50.0).unwrap();
        assert_eq!(r.verdict, ApVerdict::ViolatingWitness);
        assert!(r.witness.unwrap().deviation >= 1.9);
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = TimeGrid::new(0.0, 0.5, 100).unwrap();
        let orbit = orbit_of(grid, |t| basis_vector(1, 0) * cis(t));
        assert!(matches!(ap_scan(&orbit, 0.5, 20.0), Err(Error::GridTooCoarse(_))));
        assert!(matches!(ap_scan(&orbit, 0.5, 40.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn constant_orbit_cover() {
        let grid = TimeGrid::new(0.0, 0.1, 100).unwrap();
        let orbit = orbit_of(grid, |_| basis_vector(3, 1));
        let r = covering_number(&orbit, 0.1, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert_eq!(r.counts, vec![1, 1, 1, 1]);
        assert!(r.saturated);
    }

    #[test]
    fn circle_cover_saturates_within_chord_bound() {
        let e = 2.0;
        let eps = 0.2;
        let grid = TimeGrid::new(0.0, 0.001, 20_000).unwrap();
        let orbit = orbit_of(grid, |t| basis_vector(2, 0) * cis(-e * t));
        let period = TAU / e;
        let r = covering_number(&orbit, eps, &[period, 2.0 * period, 4.0 * period]).unwrap();
        assert!(r.saturated);
        let bound = (std::f64::consts::PI / (eps / 2.0).asin()).ceil() as usize + 1;
        assert!(r.counts[0] <= bound, "{} > {bound}", r.counts[0]);
        assert!(r.counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn trig_polynomial_gap_matches_fine_scan() {
        let lambdas = [1.0, 2.0_f64.sqrt()];
        let f = |t: f64| {
            ComplexVector::from_vec(vec![cis(-lambdas[0] * t), cis(-lambdas[1] * t)]).unscale(2f64.sqrt())
        };
        let coarse = orbit_of(TimeGrid::new(0.0, 0.02, 20_000).unwrap(), f);
        let fine = orbit_of(TimeGrid::new(0.0, 0.005, 80_000).unwrap(), f);
        let rc = ap_scan(&coarse, 0.3, 150.0).unwrap();
        let rf = ap_scan(&fine, 0.3, 150.0).unwrap();
        assert!(matches!(rc.verdict, ApVerdict::ApConsistent { .. }));
        assert!(matches!(rf.verdict, ApVerdict::ApConsistent { .. }));
        assert!((rc.max_gap - rf.max_gap).abs() <= 2.0 * 0.02 + 1e-9, "{} vs {}", rc.max_gap, rf.max_gap);
    }
}
