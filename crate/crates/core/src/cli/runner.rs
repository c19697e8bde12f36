//! Scenario execution: model and state setup, one entry per diagnostic, and
//! deterministic CSV/JSON artifacts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{
    DiagnosticConfig, EnlargedStateConfig, ProbeConfig, ProjectionConfig, ScenarioConfig, SeriesSource, StateConfig,
};
use super::CliError;
use crate::diagnostics::{
    ap_scan, bounded_v_equivalence, covering_number, derivative_expectation, derivative_orbit, energy_derivative_check,
    energy_drift_bound, energy_series, generator_expectation, rage_average, sample_orbit, stability_verdict,
    tail_escape, EnergySeries,
};
use crate::enlarged::{
    af_report, enlarged_spectrum, phase_histogram, summability_bound, theorem410_check, theta_derivative_sup,
    EnlargedSpectrum, EnlargedState, FiberFamily, TorusGrid,
};
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, c64, cis, hermitian_eig, sigma_z, ComplexMatrix, ComplexVector, HermitianOperator};
use crate::models::ModelSpec;
use crate::propagator::{monodromy, propagate, propagator_at, OrbitSample, PropagatorCache, TimeGrid};
use crate::spectral::{
    correspondence_check, floquet_spectrum, mode_regularity, prop34_synthesis, quasienergy_block, releq_check,
    FloquetSpectrum,
};
use crate::tolerance::Tolerances;

/// Recurrence and bound checks pass at these levels.
const RECURRENCE_TOLERANCE: f64 = 1e-6;
const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticEntry {
    pub index: usize,
    pub kind: &'static str,
    pub status: EntryStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialStateInfo {
    pub dim: usize,
    pub norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    /// Monodromy phases of the eigenvectors the state was built from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floquet_phases: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub config: ScenarioConfig,
    pub tolerances: Tolerances,
    pub initial_state: InitialStateInfo,
    pub entries: Vec<DiagnosticEntry>,
    pub artifacts: Vec<String>,
    pub timing_file: String,
}

impl RunReport {
    pub fn failed(&self) -> bool {
        self.entries.iter().any(|e| e.status == EntryStatus::Error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// A named output file held in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<StageTiming>,
}

impl ScenarioOutcome {
    pub fn report_name(&self) -> String {
        format!("{}.report.json", self.report.scenario)
    }

    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }

    /// Write report, artifacts and timing sidecar into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, contents: &str| -> std::io::Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, contents)?;
            written.push(path);
            Ok(())
        };
        for a in &self.artifacts {
            put(&a.name, &a.contents)?;
        }
        put(&self.report_name(), &self.report_json())?;
        let timing = serde_json::to_string_pretty(&json!({ "scenario": self.report.scenario, "stages": self.timings }))
            .expect("timings serialize");
        put(&self.report.timing_file, &(timing + "\n"))?;
        Ok(written)
    }
}

/// Comma-separated table with 17-significant-digit floats.
struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self { text: header.join(",") + "\n" }
    }

    fn with_header(header: Vec<String>) -> Self {
        Self { text: header.join(",") + "\n" }
    }

    fn row(&mut self, cells: &[f64]) {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            write!(self.text, "{c:.16e}").expect("string write");
        }
        self.text.push('\n');
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("diagnostic results serialize")
}

fn kebab<T: Serialize>(x: &T) -> String {
    match to_value(x) {
        Value::Object(m) => m.get("kind").and_then(Value::as_str).unwrap_or("unknown").to_string(),
        Value::String(s) => s,
        other => other.to_string(),
    }
}

struct Ctx<'a> {
    config: &'a ScenarioConfig,
    model: ModelSpec,
    grid: TimeGrid,
    psi0: ComplexVector,
    /// `(period, α)` when the initial state is a single monodromy eigenvector.
    floquet: Option<(f64, f64)>,
    orbit: Option<OrbitSample>,
}

/// Monodromy spectrum over `period`, closed form when the model has one.
pub fn monodromy_spectrum(model: &ModelSpec, period: f64, opts: &crate::propagator::PropagationOptions) -> Result<FloquetSpectrum> {
    let uf = if model.has_closed_form() { model.exact_propagator(period)? } else { monodromy(model, period, opts)? };
    floquet_spectrum(&uf)
}

/// Initial state, its report summary, and `(period, α)` for a single eigenvector.
type InitialState = (ComplexVector, InitialStateInfo, Option<(f64, f64)>);

fn initial_state(config: &ScenarioConfig, model: &ModelSpec) -> Result<InitialState> {
    let d = model.dim();
    let mut info = InitialStateInfo { dim: d, norm: 0.0, period: None, floquet_phases: None };
    let mut floquet = None;
    let spectrum = || -> Result<(f64, FloquetSpectrum)> {
        let t = model.period().ok_or_else(|| Error::InvalidModel(format!("{} has no period", model.name())))?;
        Ok((t, monodromy_spectrum(model, t, &config.propagation)?))
    };
    let psi = match &config.initial_state {
        StateConfig::Basis { index } => basis_vector(d, *index),
        StateConfig::Coefficients { values } => ComplexVector::from_vec(values.clone()),
        StateConfig::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let v = ComplexVector::from_fn(d, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            v.unscale(v.norm())
        }
        StateConfig::FloquetEigenvector { index } => {
            let (t, fs) = spectrum()?;
            info.period = Some(t);
            info.floquet_phases = Some(vec![fs.phases[*index]]);
            floquet = Some((t, fs.phases[*index]));
            fs.vector(*index)
        }
        StateConfig::FloquetCombination { terms } => {
            let (t, fs) = spectrum()?;
            info.period = Some(t);
            info.floquet_phases = Some(terms.iter().map(|x| fs.phases[x.index]).collect());
            terms.iter().fold(ComplexVector::zeros(d), |acc, x| acc + fs.vector(x.index) * x.weight)
        }
    };
    if psi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi.len() });
    }
    info.norm = psi.norm();
    Ok((psi, info, floquet))
}

fn probe(cfg: &ProbeConfig, model: &ModelSpec) -> Result<HermitianOperator> {
    let d = model.dim();
    let op = match cfg {
        ProbeConfig::H0 => model.h0()?,
        ProbeConfig::Number => HermitianOperator::from_real_diagonal(&(0..d).map(|k| k as f64).collect::<Vec<_>>())?,
        ProbeConfig::MomentumSquared => match model {
            ModelSpec::KickedLinear(p) => HermitianOperator::from_real_diagonal(
                &(0..d).map(|j| (p.momentum(j) as f64).powi(2)).collect::<Vec<_>>(),
            )?,
            _ => return Err(Error::InvalidArgument("momentum_squared probe needs a KickedLinear model".into())),
        },
        ProbeConfig::SigmaZ if d == 2 => HermitianOperator::new(sigma_z())?,
        ProbeConfig::SigmaZ => return Err(Error::InvalidArgument("sigma_z probe needs a two-level model".into())),
        ProbeConfig::Matrix(m) => m.operator().map_err(Error::InvalidArgument)?,
    };
    if op.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
    }
    Ok(op)
}

fn fiber_from_model(model: &ModelSpec, period: Option<f64>) -> Result<FiberFamily> {
    match model {
        ModelSpec::QuasiperiodicExact(p) => Ok(FiberFamily::Quasiperiodic(*p)),
        ModelSpec::AutonomousDiscrete(_) => {
            let t = period.ok_or_else(|| Error::InvalidArgument("constant fibre family needs a period".into()))?;
            FiberFamily::constant(model.h0()?, t)
        }
        other => Err(Error::InvalidArgument(format!("{} does not define a fibre family", other.name()))),
    }
}

fn torus_grid(fiber: &FiberFamily, q: u64) -> Result<TorusGrid> {
    match fiber {
        FiberFamily::Constant { .. } => TorusGrid::trivial(q),
        FiberFamily::Quasiperiodic(p) => TorusGrid::convergent(p.alpha(), q),
    }
}

fn fiber_spectrum(fiber: &FiberFamily, grid: &TorusGrid) -> Result<EnlargedSpectrum> {
    enlarged_spectrum(&fiber.u1_samples(grid)?, grid.shift(), fiber.period())
}

fn series_csv(series: &EnergySeries) -> Csv {
    let mut csv = Csv::new(&["t", "value"]);
    for (t, v) in series.times.iter().zip(&series.values) {
        csv.row(&[*t, *v]);
    }
    csv
}

fn series_summary(series: &EnergySeries) -> Value {
    let min = series.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({ "samples": series.values.len(), "min": min, "max": max, "sup_abs": series.sup_abs(),
            "max_imaginary": series.max_imaginary })
}

type Outcome = (Option<String>, Value, Option<Csv>);

impl Ctx<'_> {
    fn ensure_orbit(&mut self) -> Result<()> {
        if self.orbit.is_none() {
            self.orbit = Some(propagate(&self.model, &self.psi0, &self.grid, &self.config.propagation)?);
        }
        Ok(())
    }

    fn orbit(&self) -> Result<&OrbitSample> {
        self.orbit.as_ref().ok_or_else(|| Error::InvalidArgument("orbit was not propagated".into()))
    }

    fn period(&self) -> Result<f64> {
        self.model.period().ok_or_else(|| Error::InvalidModel(format!("{} has no period", self.model.name())))
    }

    fn run(&mut self, diag: &DiagnosticConfig) -> Result<Outcome> {
        if diag.needs_orbit() {
            self.ensure_orbit()?;
        }
        let span = self.grid.t1() - self.grid.t0;
        match diag {
            DiagnosticConfig::Orbit => {
                let orbit = self.orbit()?;
                let mut header = vec!["t".to_string()];
                for k in 0..orbit.dim() {
                    header.push(format!("re_{k}"));
                    header.push(format!("im_{k}"));
                }
                let mut csv = Csv::with_header(header);
                for (k, s) in orbit.states.iter().enumerate() {
                    let mut row = vec![orbit.time(k)];
                    row.extend(s.iter().flat_map(|z| [z.re, z.im]));
                    csv.row(&row);
                }
                let v = json!({ "samples": orbit.len(), "dim": orbit.dim(), "max_norm_drift": orbit.max_norm_drift });
                Ok((None, v, Some(csv)))
            }
            DiagnosticConfig::ApScan { epsilon, tau_max } => {
                let r = ap_scan(self.orbit()?, *epsilon, tau_max.unwrap_or(0.5 * span))?;
                let mut csv = Csv::new(&["tau_start", "tau_end"]);
                for (a, b) in &r.almost_period_intervals {
                    csv.row(&[*a, *b]);
                }
                Ok((Some(kebab(&r.verdict)), to_value(&r), Some(csv)))
            }
            DiagnosticConfig::CoveringNumber { epsilon, horizons } => {
                let r = covering_number(self.orbit()?, *epsilon, horizons)?;
                let mut csv = Csv::new(&["horizon", "count"]);
                for (h, c) in r.horizons.iter().zip(&r.counts) {
                    csv.row(&[*h, *c as f64]);
                }
                let verdict = if r.saturated { "saturated" } else { "not-saturated" };
                Ok((Some(verdict.into()), to_value(&r), Some(csv)))
            }
            DiagnosticConfig::TailEscape { probe: p, energies } => {
                let a = probe(p, &self.model)?;
                let r = tail_escape(self.orbit()?, &a, energies)?;
                let mut csv = Csv::new(&["energy", "beta"]);
                for (e, b) in r.energies.iter().zip(&r.beta) {
                    csv.row(&[*e, *b]);
                }
                Ok((Some(kebab(&r.trend)), to_value(&r), Some(csv)))
            }
            DiagnosticConfig::Rage { projection, taus } => {
                let d = self.model.dim();
                let cols: Vec<ComplexVector> = match projection {
                    ProjectionConfig::Sites(s) => s.iter().map(|&k| basis_vector(d, k)).collect(),
                    ProjectionConfig::H0Eigenvectors(s) => {
                        let eig = hermitian_eig(&self.model.h0()?)?;
                        s.iter().map(|&k| eig.vector(k)).collect()
                    }
                };
                let c = ComplexMatrix::from_columns(&cols);
                let r = rage_average(self.orbit()?, &c, taus)?;
                let mut csv = Csv::new(&["tau", "average"]);
                for (t, a) in r.taus.iter().zip(&r.averages) {
                    csv.row(&[*t, *a]);
                }
                let decreasing = r.averages.windows(2).all(|w| w[1] < w[0]);
                let verdict = if decreasing { "strictly-decreasing" } else { "not-decreasing" };
                Ok((Some(verdict.into()), to_value(&r), Some(csv)))
            }
            DiagnosticConfig::EnergySeries { probe: p } => {
                let a = probe(p, &self.model)?;
                let s = energy_series(self.orbit()?, &a)?;
                Ok((None, series_summary(&s), Some(series_csv(&s))))
            }
            DiagnosticConfig::Stability { source, thresholds } => {
                let series = match source {
                    SeriesSource::Generator => generator_expectation(self.orbit()?, &self.model)?,
                    SeriesSource::Derivative => {
                        let orbit = self.orbit()?;
                        derivative_expectation(orbit, &derivative_orbit(orbit)?)?
                    }
                    SeriesSource::Probe(p) => {
                        let a = probe(p, &self.model)?;
                        energy_series(self.orbit()?, &a)?
                    }
                };
                let v = stability_verdict(&series, thresholds)?;
                let result = json!({ "verdict": v, "series": series_summary(&series) });
                Ok((Some(kebab(&v)), result, Some(series_csv(&series))))
            }
            DiagnosticConfig::Recurrence { samples } => {
                let (t, alpha) = self.floquet.ok_or_else(|| {
                    Error::InvalidArgument("recurrence needs a floquet_eigenvector initial state".into())
                })?;
                let shifted = TimeGrid::new(self.grid.t0 + t, self.grid.h, self.grid.count)?;
                let later = propagate(&self.model, &self.psi0, &shifted, &self.config.propagation)?;
                let orbit = self.orbit()?;
                let stride = (orbit.len() / samples).max(1);
                let phase = cis(-alpha);
                let mut csv = Csv::new(&["t", "defect"]);
                let mut worst = 0.0_f64;
                let mut count = 0;
                for k in (0..orbit.len()).step_by(stride).take(*samples) {
                    let d = (&later.states[k] - &orbit.states[k] * phase).norm();
                    worst = worst.max(d);
                    count += 1;
                    csv.row(&[orbit.time(k), d]);
                }
                let verdict = if worst <= RECURRENCE_TOLERANCE { "recurrent" } else { "not-recurrent" };
                let v = json!({ "period": t, "alpha": alpha, "samples": count, "max_defect": worst,
                                "tolerance": RECURRENCE_TOLERANCE });
                Ok((Some(verdict.into()), v, Some(csv)))
            }
            DiagnosticConfig::BoundedVEquivalence => {
                let sup = self.model.perturbation_sup_norm()?;
                let h0 = self.model.h0()?;
                let norm_sq = self.psi0.norm_squared();
                let orbit = self.orbit()?;
                let e = generator_expectation(orbit, &self.model)?;
                let e0 = energy_series(orbit, &h0)?;
                let violation = bounded_v_equivalence(&e, &e0, sup, norm_sq)?;
                let gap = e.values.iter().zip(&e0.values).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                let mut csv = Csv::new(&["t", "energy", "unperturbed_energy"]);
                for k in 0..e.values.len() {
                    csv.row(&[e.times[k], e.values[k], e0.values[k]]);
                }
                let verdict = if violation <= BOUND_TOLERANCE { "within-bound" } else { "bound-violated" };
                let v = json!({ "violation": violation, "sup_v": sup, "norm_squared": norm_sq, "max_gap": gap });
                Ok((Some(verdict.into()), v, Some(csv)))
            }
            DiagnosticConfig::EnergyBounds => {
                let orbit = self.orbit()?;
                let d = energy_derivative_check(orbit, &self.model)?;
                let b = energy_drift_bound(orbit, &self.model)?;
                let ok = b.linear_violation <= BOUND_TOLERANCE && b.integral_violation.is_none_or(|v| v <= BOUND_TOLERANCE);
                let verdict = if ok { "within-bound" } else { "bound-violated" };
                Ok((Some(verdict.into()), json!({ "derivative": d, "drift": b }), None))
            }
            DiagnosticConfig::DerivativeScaling => {
                let defect = |h: f64| -> Result<f64> {
                    let g = TimeGrid::from_span(self.grid.t0, self.grid.t1(), h)?;
                    let o = propagate(&self.model, &self.psi0, &g, &self.config.propagation)?;
                    Ok(energy_derivative_check(&o, &self.model)?.max_defect)
                };
                let (d1, d2) = (defect(self.grid.h)?, defect(0.5 * self.grid.h)?);
                let ratio = d1 / d2;
                let verdict = if (3.0..=5.0).contains(&ratio) { "second-order" } else { "order-unclear" };
                let v = json!({ "h": self.grid.h, "defect_h": d1, "defect_half_h": d2, "ratio": ratio });
                Ok((Some(verdict.into()), v, None))
            }
            DiagnosticConfig::QuasienergyCorrespondence { cutoffs, quadrature } => {
                let t = self.period()?;
                let fs = monodromy_spectrum(&self.model, t, &self.config.propagation)?;
                let reports = cutoffs
                    .par_iter()
                    .map(|&n| {
                        let b = quasienergy_block(&self.model, t, n, *quadrature)?;
                        let qs = b.spectrum()?;
                        Ok(correspondence_check(&b, &qs, &fs))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut csv = Csv::new(&["cutoff", "max_mismatch", "unmatched"]);
                for r in &reports {
                    csv.row(&[r.cutoff as f64, r.max_mismatch, r.unmatched as f64]);
                }
                let decreasing = reports.windows(2).all(|w| w[1].max_mismatch < w[0].max_mismatch);
                let table: Vec<Value> = reports
                    .iter()
                    .map(|r| json!({ "cutoff": r.cutoff, "max_mismatch": r.max_mismatch, "unmatched": r.unmatched,
                                     "interior_eigenvalues": r.interior_eigenvalues, "pairs": r.pairs }))
                    .collect();
                let verdict = if reports.iter().all(|r| r.unmatched == 0) { "matched" } else { "unmatched" };
                let v = json!({ "period": t, "floquet_phases": fs.phases, "cutoffs": table,
                                "strictly_decreasing": decreasing });
                Ok((Some(verdict.into()), v, Some(csv)))
            }
            DiagnosticConfig::Releq { cutoff, sigma, samples } => {
                let t = self.period()?;
                let b = quasienergy_block(&self.model, t, *cutoff, None)?;
                let qs = b.spectrum()?;
                let h = t / 400.0;
                let k_sigma = (sigma / h).round() as usize;
                let grid = TimeGrid::new(0.0, h, 400 + k_sigma)?;
                let cache = PropagatorCache::build(&self.model, &grid, &self.config.propagation)?;
                let sigma_on_grid = grid.time(k_sigma);
                let f = b.embed(&self.psi0, 0);
                let d = releq_check(&b, &qs, &f, sigma_on_grid, &cache, *samples)?;
                let v = json!({ "cutoff": cutoff, "sigma": sigma_on_grid, "defect": d, "cache_points": cache.len() });
                Ok((None, v, None))
            }
            DiagnosticConfig::Prop34Synthesis { cutoff, samples } => {
                let t = self.period()?;
                let b = quasienergy_block(&self.model, t, *cutoff, None)?;
                let qs = b.spectrum()?;
                let syn = prop34_synthesis(&b, &qs, &self.psi0)?;
                let mut csv = Csv::new(&["sigma", "deviation"]);
                let mut worst = 0.0_f64;
                for k in 0..*samples {
                    let sigma = t * k as f64 / *samples as f64;
                    let back = propagator_at(&self.model, sigma, &self.config.propagation)?.adjoint().apply(&self.psi0);
                    let d = (syn.evaluate(sigma) - back).norm();
                    worst = worst.max(d);
                    csv.row(&[sigma, d]);
                }
                let v = json!({ "cutoff": cutoff, "expansion_residual": syn.residual, "terms": syn.coefficients.len(),
                                "max_deviation": worst });
                Ok((None, v, Some(csv)))
            }
            DiagnosticConfig::ModeRegularity { points } => {
                let (t, alpha) = self.floquet.ok_or_else(|| {
                    Error::InvalidArgument("mode_regularity needs a floquet_eigenvector initial state".into())
                })?;
                let r = mode_regularity(
                    |s| Ok(propagator_at(&self.model, s, &self.config.propagation)?.apply(&self.psi0) * cis(alpha * s / t)),
                    t,
                    *points,
                )?;
                let verdict = if r.grid_stable { "grid-stable" } else { "grid-unstable" };
                Ok((Some(verdict.into()), to_value(&r), None))
            }
            DiagnosticConfig::EnlargedSpectrum { convergents, bins, period } => {
                let fiber = fiber_from_model(&self.model, *period)?;
                let mut rows = Vec::new();
                let mut hists = Vec::new();
                for &q in convergents {
                    let grid = torus_grid(&fiber, q)?;
                    let s = fiber_spectrum(&fiber, &grid)?;
                    hists.push(phase_histogram(&s.phases, *bins));
                    rows.push(json!({ "q": q, "p": grid.p, "dim": s.phases.len(), "max_residual": s.max_residual,
                                      "gaps": s.gaps }));
                }
                let mut header = vec!["bin_start".to_string(), "bin_end".to_string()];
                header.extend(convergents.iter().map(|q| format!("count_q{q}")));
                let mut csv = Csv::with_header(header);
                let w = std::f64::consts::TAU / *bins as f64;
                for b in 0..*bins {
                    let mut row = vec![b as f64 * w, (b + 1) as f64 * w];
                    row.extend(hists.iter().map(|h| h[b] as f64));
                    csv.row(&row);
                }
                Ok((None, json!({ "alpha": fiber.alpha(), "convergents": rows }), Some(csv)))
            }
            DiagnosticConfig::AfIdentity { q, probe: p, state, times, period, ap_epsilon } => {
                let fiber = fiber_from_model(&self.model, *period)?;
                let grid = torus_grid(&fiber, *q)?;
                let spec = fiber_spectrum(&fiber, &grid)?;
                let f = match state {
                    EnlargedStateConfig::Constant => EnlargedState::constant(grid.len(), &self.psi0)?,
                    EnlargedStateConfig::Eigenvectors { terms } => {
                        let d = fiber.dim();
                        let mut vals = vec![ComplexVector::zeros(d); grid.len()];
                        for term in terms {
                            let fn_ = spec.states.get(term.index).ok_or(Error::IndexOutOfSequence {
                                index: term.index,
                                len: spec.states.len(),
                            })?;
                            for (v, x) in vals.iter_mut().zip(fn_.values()) {
                                *v += x * term.weight;
                            }
                        }
                        EnlargedState::new(vals)?
                    }
                };
                let a = probe(p, &self.model)?;
                let ts: Vec<f64> = (0..times.count).map(|k| k as f64 * times.step).collect();
                let r = af_report(&f, &spec, &fiber, &a, &grid, &ts)?;
                let ap = af_ap_check(&r, *ap_epsilon)?;
                let stab = stability_verdict(
                    &EnergySeries::from_values(ts[1..].to_vec(), r.series[1..].to_vec())?,
                    &Default::default(),
                )?;
                let sups: Vec<f64> = r.support.iter().map(|&n| theta_derivative_sup(&spec.states[n])).collect();
                let summ = summability_bound(&r.coefficients, &r.eigenvalues, &sups)?;
                let mut csv = Csv::new(&["t", "series", "direct"]);
                for ((t, s), d) in ts.iter().zip(&r.series).zip(&r.direct) {
                    csv.row(&[*t, *s, *d]);
                }
                let verdict = format!("{}/{}", kebab(&ap.verdict), kebab(&stab));
                let v = json!({
                    "q": r.q, "support": r.support, "coefficients": r.coefficients, "eigenvalues": r.eigenvalues,
                    "b": r.b, "b_hermiticity_defect": r.b_hermiticity_defect, "parseval_defect": r.parseval_defect,
                    "max_imaginary": r.max_imaginary, "max_discrepancy": r.max_discrepancy,
                    "ap_scan": { "epsilon": ap.epsilon, "tau_step": ap.tau_step, "max_gap": ap.max_gap,
                                 "verdict": ap.verdict },
                    "stability": stab, "summability": summ,
                });
                Ok((Some(verdict), v, Some(csv)))
            }
            DiagnosticConfig::Theorem410 { q, index, periods, lambda_shift, period } => {
                let fiber = fiber_from_model(&self.model, *period)?;
                let grid = torus_grid(&fiber, *q)?;
                let spec = fiber_spectrum(&fiber, &grid)?;
                let f = spec
                    .states
                    .get(*index)
                    .ok_or(Error::IndexOutOfSequence { index: *index, len: spec.states.len() })?;
                let lambda = spec.quasienergies()[*index] + lambda_shift;
                let r = theorem410_check(f, lambda, &fiber, &grid, *periods)?;
                Ok((None, json!({ "q": q, "p": grid.p, "lambda": lambda, "check": r }), None))
            }
        }
    }
}

/// ε-almost-period scan of an expectation series, resampled finely enough
/// that one step moves the series by at most ε/8.
fn af_ap_check(r: &crate::enlarged::AfReport, epsilon: f64) -> Result<crate::diagnostics::ApReport> {
    let span = r.times.last().copied().unwrap_or(0.0) - r.times[0];
    let m = r.coefficients.len();
    let mut lip = 0.0;
    for i in 0..m {
        for j in 0..m {
            lip += (r.coefficients[i] * r.coefficients[j]).norm() * r.b[i][j].norm() * (r.eigenvalues[j] - r.eigenvalues[i]).abs();
        }
    }
    let step = r.times.get(1).map(|t| t - r.times[0]).unwrap_or(span);
    let h = if lip > 0.0 { step.min(epsilon / (8.0 * lip)) } else { step };
    let count = (span / h).ceil() as usize;
    if count > 4_000_000 {
        return Err(Error::GridTooCoarse(format!("almost-period scan would need {count} samples")));
    }
    let grid = TimeGrid::with_count(r.times[0], r.times[0] + span, count.max(2))?;
    let support_b = ComplexMatrix::from_fn(m, m, |i, j| r.b[i][j]);
    let (vals, _) = crate::enlarged::af_series(&r.coefficients, &r.eigenvalues, &support_b, &grid.times())?;
    let orbit = sample_orbit(&grid, |t| {
        let k = ((t - grid.t0) / grid.h).round() as usize;
        ComplexVector::from_element(1, c64(vals[k.min(vals.len() - 1)], 0.0))
    })?;
    ap_scan(&orbit, epsilon, 0.5 * span)
}

/// Run one scenario in memory.
pub fn run_scenario(config: &ScenarioConfig) -> std::result::Result<ScenarioOutcome, CliError> {
    let scenario_err = |source: Error| CliError::Scenario { scenario: config.scenario.clone(), source };
    let mut timings = Vec::new();
    let clock = Instant::now();
    let model = config.model.into_spec().map_err(|m| scenario_err(Error::InvalidModel(m)))?;
    let grid = TimeGrid::from_span(config.grid.t0, config.grid.t1, config.grid.h).map_err(scenario_err)?;
    let (psi0, info, floquet) = initial_state(config, &model).map_err(scenario_err)?;
    timings.push(StageTiming { stage: "setup".into(), seconds: clock.elapsed().as_secs_f64() });

    let mut ctx = Ctx { config, model, grid, psi0, floquet, orbit: None };
    if config.diagnostics.iter().any(DiagnosticConfig::needs_orbit) {
        let clock = Instant::now();
        if let Err(e) = ctx.ensure_orbit() {
            return Err(scenario_err(e));
        }
        timings.push(StageTiming { stage: "propagate".into(), seconds: clock.elapsed().as_secs_f64() });
    }

    let mut entries = Vec::new();
    let mut artifacts = Vec::new();
    let mut seen: std::collections::BTreeMap<&str, usize> = Default::default();
    for (i, diag) in config.diagnostics.iter().enumerate() {
        let clock = Instant::now();
        let kind = diag.kind();
        let n = seen.entry(kind).or_insert(0);
        let stem = if *n == 0 { kind.to_string() } else { format!("{kind}-{n}") };
        *n += 1;
        let entry = match ctx.run(diag) {
            Ok((verdict, result, csv)) => {
                let artifact = csv.map(|c| {
                    let name = format!("{}.{stem}.csv", config.scenario);
                    artifacts.push(Artifact { name: name.clone(), contents: c.text });
                    name
                });
                DiagnosticEntry { index: i, kind, status: EntryStatus::Ok, verdict, result: Some(result), error: None, artifact }
            }
            Err(e) => DiagnosticEntry {
                index: i,
                kind,
                status: EntryStatus::Error,
                verdict: None,
                result: None,
                error: Some(format!("scenario {}: diagnostics[{i}] ({kind}): {e}", config.scenario)),
                artifact: None,
            },
        };
        entries.push(entry);
        timings.push(StageTiming { stage: format!("diagnostics[{i}].{kind}"), seconds: clock.elapsed().as_secs_f64() });
    }
    let report = RunReport {
        tool: "floquet-lab",
        version: env!("CARGO_PKG_VERSION"),
        scenario: config.scenario.clone(),
        config: config.clone(),
        tolerances: Tolerances::DEFAULT,
        initial_state: info,
        artifacts: artifacts.iter().map(|a| a.name.clone()).collect(),
        timing_file: format!("{}.timing.json", config.scenario),
        entries,
    };
    Ok(ScenarioOutcome { report, artifacts, timings })
}
