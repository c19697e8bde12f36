//! Scenario configuration: JSON schema, validation with field paths, and
//! conversion into model and state specifications.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::diagnostics::StabilityThresholds;
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};
use crate::models::{
    AutonomousDiscreteParams, BoundedPerturbationParams, DrivenTwoLevelParams, KickSequence, KickedLinearParams,
    ModelSpec, QuasiperiodicExactParams, VARIANTS,
};
use crate::propagator::{PropagationOptions, TimeGrid};

/// One validation failure, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl FieldError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    /// Seed for any randomized initial state.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    pub initial_state: StateConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub propagation: PropagationOptions,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
}

/// Energies given as a list or as `sites` copies of one `value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnergiesConfig {
    List(Vec<f64>),
    Uniform { sites: usize, value: f64 },
}

impl EnergiesConfig {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Uniform { sites, value } => vec![*value; *sites],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KicksConfig {
    Zero,
    One,
    #[serde(untagged)]
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiperiodicConfig {
    pub omega1: f64,
    pub omega2: f64,
    #[serde(default)]
    pub theta1: f64,
}

/// A Hermitian matrix: real diagonal, dense real rows, or dense complex rows
/// of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixConfig {
    Diagonal(Vec<f64>),
    Real(Vec<Vec<f64>>),
    Complex(Vec<Vec<C64>>),
}

impl MatrixConfig {
    fn matrix(&self) -> Result<ComplexMatrix, String> {
        let rows: Vec<Vec<C64>> = match self {
            Self::Diagonal(d) => {
                return Ok(ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    d.len(),
                    d.iter().map(|&x| C64::new(x, 0.0)),
                )))
            }
            Self::Real(r) => r.iter().map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect()).collect(),
            Self::Complex(r) => r.clone(),
        };
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(format!("matrix must be square, got {n} rows of unequal length"));
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn operator(&self) -> Result<HermitianOperator, String> {
        HermitianOperator::new(self.matrix()?).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
pub enum ModelConfig {
    DrivenTwoLevel { omega0: f64, drive_amplitude: f64, drive_frequency: f64 },
    QuasiperiodicExact {
        omega1: f64,
        omega2: f64,
        #[serde(default)]
        theta1: f64,
    },
    DirectSumQuasiperiodic { blocks: Vec<QuasiperiodicConfig> },
    KickedLinear { cutoff: usize, kicks: KicksConfig },
    AutonomousDiscrete {
        energies: EnergiesConfig,
        #[serde(default)]
        hopping: f64,
    },
    BoundedPerturbation {
        energies: EnergiesConfig,
        #[serde(default)]
        hopping: f64,
        b1: MatrixConfig,
        b2: MatrixConfig,
    },
}

impl ModelConfig {
    pub fn into_spec(&self) -> Result<ModelSpec, String> {
        fn e<T>(r: crate::Result<T>) -> Result<T, String> {
            r.map_err(|e| e.to_string())
        }
        Ok(match self {
            Self::DrivenTwoLevel { omega0, drive_amplitude, drive_frequency } => {
                ModelSpec::DrivenTwoLevel(e(DrivenTwoLevelParams::new(*omega0, *drive_amplitude, *drive_frequency))?)
            }
            Self::QuasiperiodicExact { omega1, omega2, theta1 } => {
                ModelSpec::QuasiperiodicExact(e(QuasiperiodicExactParams::new(*omega1, *omega2, *theta1))?)
            }
            Self::DirectSumQuasiperiodic { blocks } => {
                let b = blocks
                    .iter()
                    .map(|c| QuasiperiodicExactParams::new(c.omega1, c.omega2, c.theta1))
                    .collect::<crate::Result<Vec<_>>>();
                e(ModelSpec::direct_sum(e(b)?))?
            }
            Self::KickedLinear { cutoff, kicks } => {
                let seq = match kicks {
                    KicksConfig::Zero => KickSequence::Zero,
                    KicksConfig::One => KickSequence::One,
                    KicksConfig::List(v) => KickSequence::List(v.clone()),
                };
                ModelSpec::KickedLinear(e(KickedLinearParams::new(*cutoff, seq))?)
            }
            Self::AutonomousDiscrete { energies, hopping } => {
                ModelSpec::AutonomousDiscrete(e(AutonomousDiscreteParams::new(energies.values(), *hopping))?)
            }
            Self::BoundedPerturbation { energies, hopping, b1, b2 } => {
                let base = e(AutonomousDiscreteParams::new(energies.values(), *hopping))?;
                ModelSpec::BoundedPerturbation(e(BoundedPerturbationParams::new(base, b1.operator()?, b2.operator()?))?)
            }
        })
    }
}

/// One term `w·ξ_j` of a Floquet-eigenvector combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetTerm {
    pub index: usize,
    pub weight: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Basis { index: usize },
    Coefficients { values: Vec<C64> },
    /// Monodromy eigenvector `ξ_index`, phases ascending.
    FloquetEigenvector { index: usize },
    FloquetCombination { terms: Vec<FloquetTerm> },
    /// Seeded random unit vector.
    Random,
}

/// Probe operator `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeConfig {
    /// The model's unperturbed Hamiltonian.
    H0,
    /// `diag(0, 1, …, d−1)`.
    Number,
    /// `diag(n²)` in the kicked momentum basis.
    MomentumSquared,
    SigmaZ,
    #[serde(untagged)]
    Matrix(MatrixConfig),
}

/// Source of an expectation series fed to the stability verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesSource {
    /// `⟨ψ(t), H(t)ψ(t)⟩`.
    Generator,
    /// `⟨ψ(t), i dψ/dt⟩` from finite differences of the orbit.
    Derivative,
    Probe(ProbeConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionConfig {
    Sites(Vec<usize>),
    H0Eigenvectors(Vec<usize>),
}

/// Initial state on the enlarged grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnlargedStateConfig {
    /// `1 ⊗ ψ₀` from the scenario's initial state.
    Constant,
    /// `Σ w_n f_n` over enlarged eigenvectors, phases ascending.
    Eigenvectors { terms: Vec<FloquetTerm> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesConfig {
    pub count: usize,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiagnosticConfig {
    /// Write the sampled orbit.
    Orbit,
    ApScan {
        epsilon: f64,
        #[serde(default)]
        tau_max: Option<f64>,
    },
    CoveringNumber { epsilon: f64, horizons: Vec<f64> },
    TailEscape { probe: ProbeConfig, energies: Vec<f64> },
    Rage { projection: ProjectionConfig, taus: Vec<f64> },
    EnergySeries { probe: ProbeConfig },
    Stability {
        source: SeriesSource,
        #[serde(default)]
        thresholds: StabilityThresholds,
    },
    /// `‖ψ(t+T) − e^{−iα}ψ(t)‖` for a Floquet eigenvector orbit.
    Recurrence {
        #[serde(default = "default_samples")]
        samples: usize,
    },
    BoundedVEquivalence,
    EnergyBounds,
    /// Derivative-identity defect at `h` and `h/2`.
    DerivativeScaling,
    QuasienergyCorrespondence {
        cutoffs: Vec<usize>,
        #[serde(default)]
        quadrature: Option<usize>,
    },
    Releq {
        cutoff: usize,
        sigma: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Prop34Synthesis {
        cutoff: usize,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    ModeRegularity {
        #[serde(default = "default_points")]
        points: usize,
    },
    EnlargedSpectrum {
        convergents: Vec<u64>,
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default)]
        period: Option<f64>,
    },
    AfIdentity {
        q: u64,
        probe: ProbeConfig,
        state: EnlargedStateConfig,
        times: TimesConfig,
        #[serde(default)]
        period: Option<f64>,
        #[serde(default = "default_af_epsilon")]
        ap_epsilon: f64,
    },
    Theorem410 {
        q: u64,
        index: usize,
        periods: usize,
        #[serde(default)]
        lambda_shift: f64,
        #[serde(default)]
        period: Option<f64>,
    },
}

fn default_samples() -> usize {
    200
}
fn default_points() -> usize {
    128
}
fn default_bins() -> usize {
    16
}
fn default_af_epsilon() -> f64 {
    0.05
}

impl DiagnosticConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Orbit => "orbit",
            Self::ApScan { .. } => "ap_scan",
            Self::CoveringNumber { .. } => "covering_number",
            Self::TailEscape { .. } => "tail_escape",
            Self::Rage { .. } => "rage",
            Self::EnergySeries { .. } => "energy_series",
            Self::Stability { .. } => "stability",
            Self::Recurrence { .. } => "recurrence",
            Self::BoundedVEquivalence => "bounded_v_equivalence",
            Self::EnergyBounds => "energy_bounds",
            Self::DerivativeScaling => "derivative_scaling",
            Self::QuasienergyCorrespondence { .. } => "quasienergy_correspondence",
            Self::Releq { .. } => "releq",
            Self::Prop34Synthesis { .. } => "prop34_synthesis",
            Self::ModeRegularity { .. } => "mode_regularity",
            Self::EnlargedSpectrum { .. } => "enlarged_spectrum",
            Self::AfIdentity { .. } => "af_identity",
            Self::Theorem410 { .. } => "theorem410",
        }
    }

    /// Whether the diagnostic consumes the propagated orbit.
    pub fn needs_orbit(&self) -> bool {
        !matches!(
            self,
            Self::QuasienergyCorrespondence { .. }
                | Self::Releq { .. }
                | Self::Prop34Synthesis { .. }
                | Self::ModeRegularity { .. }
                | Self::EnlargedSpectrum { .. }
                | Self::AfIdentity { .. }
                | Self::Theorem410 { .. }
                | Self::DerivativeScaling
        )
    }
}

/// Parse and validate a config document, collecting every violation.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<FieldError>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| vec![FieldError::new("$", format!("invalid JSON: {e}"))])?;
    let mut errors = precheck(&value);
    if !errors.is_empty() {
        return Err(errors);
    }
    let config: ScenarioConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        vec![FieldError::new(if path.is_empty() { "$".into() } else { path }, e.into_inner().to_string())]
    })?;
    errors.extend(semantic_errors(&config));
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(errors)
    }
}

/// Checks on the raw document that give sharper paths than the typed decode.
fn precheck(v: &serde_json::Value) -> Vec<FieldError> {
    let mut errors = Vec::new();
    let Some(obj) = v.as_object() else {
        return vec![FieldError::new("$", "config must be a JSON object")];
    };
    match obj.get("model").and_then(|m| m.get("variant")) {
        Some(serde_json::Value::String(s)) if !VARIANTS.iter().any(|(n, _)| n == s) => {
            let known: Vec<&str> = VARIANTS.iter().map(|(n, _)| *n).collect();
            errors.push(FieldError::new(
                "model.variant",
                format!("unknown model variant `{s}`; expected one of {}", known.join(", ")),
            ));
        }
        Some(serde_json::Value::String(_)) => {}
        Some(_) => errors.push(FieldError::new("model.variant", "must be a string")),
        None if obj.contains_key("model") => errors.push(FieldError::new("model.variant", "missing field")),
        None => {}
    }
    errors
}

fn positive(errors: &mut Vec<FieldError>, path: &str, x: f64) {
    if !(x > 0.0 && x.is_finite()) {
        errors.push(FieldError::new(path, format!("must be positive and finite, got {x}")));
    }
}

fn semantic_errors(c: &ScenarioConfig) -> Vec<FieldError> {
    let mut errors = Vec::new();
    if c.scenario.is_empty() || !c.scenario.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '-' || ch == '_') {
        errors.push(FieldError::new("scenario", "must be a non-empty name of [A-Za-z0-9_-]"));
    }
    let model = match c.model.into_spec() {
        Ok(m) => Some(m),
        Err(msg) => {
            errors.push(FieldError::new("model", msg));
            None
        }
    };
    positive(&mut errors, "grid.h", c.grid.h);
    if !c.grid.t0.is_finite() {
        errors.push(FieldError::new("grid.t0", "must be finite"));
    }
    if !(c.grid.t1 > c.grid.t0) || !c.grid.t1.is_finite() {
        errors.push(FieldError::new("grid.t1", format!("must exceed grid.t0 = {}", c.grid.t0)));
    } else if c.grid.h > 0.0 {
        if let Err(e) = TimeGrid::from_span(c.grid.t0, c.grid.t1, c.grid.h) {
            errors.push(FieldError::new("grid", e.to_string()));
        }
    }
    positive(&mut errors, "propagation.max_step", c.propagation.max_step);
    positive(&mut errors, "propagation.max_norm_drift", c.propagation.max_norm_drift);
    if c.propagation.substeps == 0 {
        errors.push(FieldError::new("propagation.substeps", "must be positive"));
    }
    if c.propagation.reunitarize_every == 0 {
        errors.push(FieldError::new("propagation.reunitarize_every", "must be positive"));
    }
    if let Some(m) = &model {
        let d = m.dim();
        match &c.initial_state {
            StateConfig::Basis { index } if *index >= d => {
                errors.push(FieldError::new("initial_state.index", format!("must be < dimension {d}")))
            }
            StateConfig::Coefficients { values } if values.len() != d => errors.push(FieldError::new(
                "initial_state.values",
                format!("expected {d} coefficients, got {}", values.len()),
            )),
            StateConfig::FloquetEigenvector { index } => {
                if *index >= d {
                    errors.push(FieldError::new("initial_state.index", format!("must be < dimension {d}")));
                }
                if m.period().is_none() {
                    errors.push(FieldError::new("initial_state", format!("{} has no period", m.name())));
                }
            }
            StateConfig::FloquetCombination { terms } => {
                if terms.is_empty() {
                    errors.push(FieldError::new("initial_state.terms", "must be non-empty"));
                }
                for (i, t) in terms.iter().enumerate() {
                    if t.index >= d {
                        errors.push(FieldError::new(
                            format!("initial_state.terms[{i}].index"),
                            format!("must be < dimension {d}"),
                        ));
                    }
                }
                if m.period().is_none() {
                    errors.push(FieldError::new("initial_state", format!("{} has no period", m.name())));
                }
            }
            _ => {}
        }
    }
    let span = c.grid.t1 - c.grid.t0;
    for (i, diag) in c.diagnostics.iter().enumerate() {
        let p = |field: &str| format!("diagnostics[{i}].{field}");
        match diag {
            DiagnosticConfig::ApScan { epsilon, tau_max } => {
                positive(&mut errors, &p("epsilon"), *epsilon);
                if let Some(t) = tau_max {
                    positive(&mut errors, &p("tau_max"), *t);
                    if *t > 0.5 * span * (1.0 + 1e-12) {
                        errors.push(FieldError::new(p("tau_max"), format!("must not exceed half the horizon {}", span / 2.0)));
                    }
                }
            }
            DiagnosticConfig::CoveringNumber { epsilon, horizons } => {
                positive(&mut errors, &p("epsilon"), *epsilon);
                if horizons.is_empty() || horizons.windows(2).any(|w| w[1] < w[0]) {
                    errors.push(FieldError::new(p("horizons"), "must be a non-empty nondecreasing list"));
                }
                if horizons.iter().any(|&h| !(0.0..=span * (1.0 + 1e-12)).contains(&h)) {
                    errors.push(FieldError::new(p("horizons"), format!("must lie within [0, {span}]")));
                }
            }
            DiagnosticConfig::TailEscape { energies, .. } => {
                if energies.is_empty() || energies.windows(2).any(|w| w[1] < w[0]) {
                    errors.push(FieldError::new(p("energies"), "must be a non-empty nondecreasing list"));
                }
            }
            DiagnosticConfig::Rage { taus, projection } => {
                if taus.iter().any(|&t| !(t > 0.0 && t <= span * (1.0 + 1e-12))) {
                    errors.push(FieldError::new(p("taus"), format!("must lie within (0, {span}]")));
                }
                let idx = match projection {
                    ProjectionConfig::Sites(v) | ProjectionConfig::H0Eigenvectors(v) => v,
                };
                if idx.is_empty() {
                    errors.push(FieldError::new(p("projection"), "must name at least one vector"));
                }
                if let Some(m) = &model {
                    if idx.iter().any(|&k| k >= m.dim()) {
                        errors.push(FieldError::new(p("projection"), format!("indices must be < {}", m.dim())));
                    }
                }
            }
            DiagnosticConfig::Recurrence { samples } | DiagnosticConfig::Releq { samples, .. } | DiagnosticConfig::Prop34Synthesis { samples, .. } => {
                if *samples == 0 {
                    errors.push(FieldError::new(p("samples"), "must be positive"));
                }
                if let DiagnosticConfig::Releq { sigma, .. } = diag {
                    positive(&mut errors, &p("sigma"), *sigma);
                }
            }
            DiagnosticConfig::QuasienergyCorrespondence { cutoffs, .. } => {
                if cutoffs.is_empty() || cutoffs.contains(&0) {
                    errors.push(FieldError::new(p("cutoffs"), "must be a non-empty list of positive cutoffs"));
                }
            }
            DiagnosticConfig::EnlargedSpectrum { convergents, bins, .. } => {
                if convergents.is_empty() || convergents.contains(&0) {
                    errors.push(FieldError::new(p("convergents"), "must be a non-empty list of positive grid sizes"));
                }
                if *bins == 0 {
                    errors.push(FieldError::new(p("bins"), "must be positive"));
                }
            }
            DiagnosticConfig::AfIdentity { q, times, ap_epsilon, .. } => {
                if *q == 0 {
                    errors.push(FieldError::new(p("q"), "must be positive"));
                }
                if times.count < 2 {
                    errors.push(FieldError::new(p("times.count"), "must be at least 2"));
                }
                positive(&mut errors, &p("times.step"), times.step);
                positive(&mut errors, &p("ap_epsilon"), *ap_epsilon);
            }
            DiagnosticConfig::Theorem410 { q, .. } if *q == 0 => errors.push(FieldError::new(p("q"), "must be positive")),
            _ => {}
        }
    }
    errors
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALID: &str = r#"{
        "scenario": "demo",
        "model": {"variant": "DrivenTwoLevel", "omega0": 1.0, "drive_amplitude": 0.4, "drive_frequency": 1.3},
        "initial_state": {"kind": "basis", "index": 0},
        "grid": {"t1": 10.0, "h": 0.01},
        "diagnostics": [{"kind": "ap_scan", "epsilon": 0.1}]
    }"#;

    #[test]
    fn valid_config_parses() {
        let c = parse_config(VALID).unwrap();
        assert_eq!(c.diagnostics.len(), 1);
        assert_eq!(c.grid.t0, 0.0);
        let echo = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&echo).unwrap(), c);
    }

    #[test]
    fn zero_step_reported_at_grid_h() {
        let e = parse_config(&VALID.replace("\"h\": 0.01", "\"h\": 0.0")).unwrap_err();
        assert!(e.iter().any(|f| f.path == "grid.h"), "{e:?}");
    }

    #[test]
    fn unknown_variant_names_field() {
        let e = parse_config(&VALID.replace("DrivenTwoLevel", "Harmonic")).unwrap_err();
        assert_eq!(e[0].path, "model.variant");
        assert!(e[0].message.contains("Harmonic"));
    }

    #[test]
    fn typed_errors_carry_paths() {
        let e = parse_config(&VALID.replace("\"epsilon\": 0.1", "\"epsilon\": \"x\"")).unwrap_err();
        assert!(e[0].path.starts_with("diagnostics[0]"), "{e:?}");
        let e = parse_config(&VALID.replace("\"omega0\"", "\"omega_0\"")).unwrap_err();
        assert!(e[0].path.starts_with("model"), "{e:?}");
    }

    #[test]
    fn semantic_errors_collected() {
        let bad = VALID.replace("\"index\": 0", "\"index\": 5").replace("\"h\": 0.01", "\"h\": -1.0");
        let e = parse_config(&bad).unwrap_err();
        assert!(e.iter().any(|f| f.path == "grid.h"));
        assert!(e.iter().any(|f| f.path == "initial_state.index"));
    }

    #[test]
    fn matrices_and_energies() {
        let m: MatrixConfig = serde_json::from_str(r#"{"complex": [[[1,0],[0,1]],[[0,-1],[2,0]]]}"#).unwrap();
        assert!(m.operator().is_ok());
        let m: MatrixConfig = serde_json::from_str(r#"{"real": [[1,2],[3,4]]}"#).unwrap();
        assert!(m.operator().is_err());
        let e: EnergiesConfig = serde_json::from_str(r#"{"sites": 3, "value": 2.0}"#).unwrap();
        assert_eq!(e.values(), vec![2.0; 3]);
        let k: KicksConfig = serde_json::from_str(r#"[0.5, 1.0]"#).unwrap();
        assert_eq!(k, KicksConfig::List(vec![0.5, 1.0]));
        let k: KicksConfig = serde_json::from_str(r#""one""#).unwrap();
        assert_eq!(k, KicksConfig::One);
        let p: ProbeConfig = serde_json::from_str(r#"{"diagonal": [0, 1]}"#).unwrap();
        assert!(matches!(p, ProbeConfig::Matrix(MatrixConfig::Diagonal(_))));
        let p: ProbeConfig = serde_json::from_str(r#""h0""#).unwrap();
        assert_eq!(p, ProbeConfig::H0);
    }
}
