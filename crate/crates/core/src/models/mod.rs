//! Built-in Hamiltonian families.
//!
//! Each variant samples `H(t)` where a pointwise generator exists and, where
//! one is known, evaluates the closed-form propagator `U(t, 0)` used as an
//! oracle by the stepping engine.

mod kicked;
mod quasiperiodic;

pub use kicked::{KickSequence, KickStepper, KickedLinearParams};
pub use quasiperiodic::QuasiperiodicExactParams;

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{c64, cis, sigma_x, sigma_y, sigma_z, ComplexMatrix, HermitianOperator, UnitaryOperator};

/// Split `t = kT + δ` with `k = floor(t/T)` and `0 ≤ δ < T`.
pub fn floor_div(t: f64, period: f64) -> (i64, f64) {
    let mut k = (t / period).floor();
    let mut delta = t - k * period;
    if delta >= period {
        k += 1.0;
        delta -= period;
    }
    if delta < 0.0 {
        k -= 1.0;
        delta += period;
    }
    (k as i64, delta.max(0.0))
}

/// Two-level system under a circularly polarized drive,
/// `H(t) = (ω₀/2)σ_z + (Ω/2)(cos ωt σ_x + sin ωt σ_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenTwoLevelParams {
    pub omega0: f64,
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
}

impl DrivenTwoLevelParams {
    pub fn new(omega0: f64, drive_amplitude: f64, drive_frequency: f64) -> Result<Self> {
        if !omega0.is_finite() || !drive_amplitude.is_finite() {
            return Err(Error::InvalidModel("omega0 and drive_amplitude must be finite".into()));
        }
        if !(drive_frequency > 0.0 && drive_frequency.is_finite()) {
            return Err(Error::InvalidModel("drive_frequency must be positive".into()));
        }
        Ok(Self { omega0, drive_amplitude, drive_frequency })
    }

    pub fn period(&self) -> f64 {
        TAU / self.drive_frequency
    }

    /// Drive phase `ωt`, with `t` reduced modulo the period first.
    fn drive_phase(&self, t: f64) -> f64 {
        self.drive_frequency * t.rem_euclid(self.period())
    }

    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let phi = self.drive_phase(t);
        let (s, c) = phi.sin_cos();
        let half = 0.5 * self.drive_amplitude;
        sigma_z().scale(0.5 * self.omega0) + sigma_x().scale(half * c) + sigma_y().scale(half * s)
    }

    pub fn h0(&self) -> ComplexMatrix {
        sigma_z().scale(0.5 * self.omega0)
    }

    /// `V'(t) = (Ωω/2)(−sin ωt σ_x + cos ωt σ_y)`.
    pub fn drive_derivative(&self, t: f64) -> ComplexMatrix {
        let (s, c) = self.drive_phase(t).sin_cos();
        let k = 0.5 * self.drive_amplitude * self.drive_frequency;
        sigma_x().scale(-k * s) + sigma_y().scale(k * c)
    }

    /// Rotating-frame generator `((ω₀−ω)/2)σ_z + (Ω/2)σ_x`.
    pub fn rotating_hamiltonian(&self) -> ComplexMatrix {
        sigma_z().scale(0.5 * (self.omega0 - self.drive_frequency)) + sigma_x().scale(0.5 * self.drive_amplitude)
    }

    /// `e^{−i H_rot t}` from the Pauli-vector formula.
    pub fn rotating_propagator(&self, t: f64) -> ComplexMatrix {
        let a = 0.5 * (self.omega0 - self.drive_frequency);
        let b = 0.5 * self.drive_amplitude;
        let r = a.hypot(b);
        if r == 0.0 {
            return crate::linalg::identity(2);
        }
        let (s, c) = (r * t).sin_cos();
        let (sa, sb) = (s * a / r, s * b / r);
        ComplexMatrix::from_row_slice(2, 2, &[c64(c, -sa), c64(0.0, -sb), c64(0.0, -sb), c64(c, sa)])
    }

    /// `U(t, 0) = e^{−iωtσ_z/2} e^{−iH_rot t}`.
    pub fn propagator(&self, t: f64) -> UnitaryOperator {
        let half = 0.5 * self.drive_frequency * t;
        let frame = ComplexMatrix::from_row_slice(2, 2, &[cis(-half), c64(0.0, 0.0), c64(0.0, 0.0), cis(half)]);
        UnitaryOperator::from_parts(frame * self.rotating_propagator(t))
    }
}

/// Time-independent `H₀ = diag(E) + J(S + S†)` with `S` the lattice shift.
#[derive(Debug, Clone, PartialEq)]
pub struct AutonomousDiscreteParams {
    pub energies: Vec<f64>,
    pub hopping: f64,
    h0: HermitianOperator,
}

impl AutonomousDiscreteParams {
    pub fn new(energies: Vec<f64>, hopping: f64) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidModel("energies must be non-empty".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) || !hopping.is_finite() {
            return Err(Error::InvalidModel("energies and hopping must be finite".into()));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidModel("energies must be nondecreasing".into()));
        }
        let n = energies.len();
        let mut m = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            energies.iter().map(|&e| c64(e, 0.0)),
        ));
        for k in 0..n.saturating_sub(1) {
            m[(k, k + 1)] = c64(hopping, 0.0);
            m[(k + 1, k)] = c64(hopping, 0.0);
        }
        let h0 = HermitianOperator::new(m)?;
        Ok(Self { energies, hopping, h0 })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }
}

/// `H(t) = H₀ + B₁ sin t + B₂/(1+|t|)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedPerturbationParams {
    pub base: AutonomousDiscreteParams,
    pub b1: HermitianOperator,
    pub b2: HermitianOperator,
    pub b1_norm: f64,
    pub b2_norm: f64,
}

impl BoundedPerturbationParams {
    pub fn new(base: AutonomousDiscreteParams, b1: HermitianOperator, b2: HermitianOperator) -> Result<Self> {
        for b in [&b1, &b2] {
            if b.dim() != base.dim() {
                return Err(Error::DimensionMismatch { expected: base.dim(), found: b.dim() });
            }
        }
        let b1_norm = b1.operator_norm()?;
        let b2_norm = b2.operator_norm()?;
        Ok(Self { base, b1, b2, b1_norm, b2_norm })
    }

    fn decay(t: f64) -> f64 {
        1.0 / (1.0 + t.abs()).powi(2)
    }

    pub fn perturbation(&self, t: f64) -> ComplexMatrix {
        self.b1.matrix().scale(t.sin()) + self.b2.matrix().scale(Self::decay(t))
    }

    /// `V'(t) = B₁ cos t ∓ 2B₂/(1+|t|)³`, the right derivative at `t = 0`.
    pub fn perturbation_derivative(&self, t: f64) -> ComplexMatrix {
        let sign = if t >= 0.0 { -1.0 } else { 1.0 };
        self.b1.matrix().scale(t.cos()) + self.b2.matrix().scale(sign * 2.0 / (1.0 + t.abs()).powi(3))
    }

    /// Upper bound on `∫₀ᵗ ‖V'(s)‖ ds` for `t ≥ 0`.
    pub fn derivative_integral_bound(&self, t: f64) -> f64 {
        let t = t.abs();
        self.b1_norm * t + self.b2_norm * (1.0 - Self::decay(t))
    }
}

/// Runtime model with validated parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    DrivenTwoLevel(DrivenTwoLevelParams),
    QuasiperiodicExact(QuasiperiodicExactParams),
    DirectSumQuasiperiodic(Vec<QuasiperiodicExactParams>),
    KickedLinear(KickedLinearParams),
    AutonomousDiscrete(AutonomousDiscreteParams),
    BoundedPerturbation(BoundedPerturbationParams),
}

/// Variant names with their required parameters, sorted by name.
pub const VARIANTS: [(&str, &str); 6] = [
    ("AutonomousDiscrete", "energies: [f64] (nondecreasing), hopping: f64 (optional, default 0)"),
    ("BoundedPerturbation", "energies: [f64], hopping: f64 (optional), b1: matrix, b2: matrix"),
    ("DirectSumQuasiperiodic", "blocks: [{omega1: f64, omega2: f64, theta1: f64}]"),
    ("DrivenTwoLevel", "omega0: f64, drive_amplitude: f64, drive_frequency: f64 (> 0)"),
    ("KickedLinear", "cutoff: usize, kicks: \"zero\" | \"one\" | [f64]"),
    ("QuasiperiodicExact", "omega1: f64 (> 0), omega2: f64 (> 0), theta1: f64"),
];

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::DrivenTwoLevel(_) => "DrivenTwoLevel",
            ModelSpec::QuasiperiodicExact(_) => "QuasiperiodicExact",
            ModelSpec::DirectSumQuasiperiodic(_) => "DirectSumQuasiperiodic",
            ModelSpec::KickedLinear(_) => "KickedLinear",
            ModelSpec::AutonomousDiscrete(_) => "AutonomousDiscrete",
            ModelSpec::BoundedPerturbation(_) => "BoundedPerturbation",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::DrivenTwoLevel(_) | ModelSpec::QuasiperiodicExact(_) => 2,
            ModelSpec::DirectSumQuasiperiodic(b) => 2 * b.len(),
            ModelSpec::KickedLinear(p) => p.dim(),
            ModelSpec::AutonomousDiscrete(p) => p.dim(),
            ModelSpec::BoundedPerturbation(p) => p.base.dim(),
        }
    }

    pub fn direct_sum(blocks: Vec<QuasiperiodicExactParams>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidModel("direct sum needs at least one block".into()));
        }
        Ok(ModelSpec::DirectSumQuasiperiodic(blocks))
    }

    /// Period of the generator, or of the monodromy for the quasiperiodic
    /// models (`T₂`). `None` for autonomous and aperiodic variants.
    pub fn period(&self) -> Option<f64> {
        match self {
            ModelSpec::DrivenTwoLevel(p) => Some(p.period()),
            ModelSpec::QuasiperiodicExact(p) => Some(p.t2()),
            ModelSpec::DirectSumQuasiperiodic(b) => {
                let t2 = b[0].t2();
                b.iter().all(|q| q.t2() == t2).then_some(t2)
            }
            ModelSpec::KickedLinear(p) => p.kicks.is_periodic().then_some(1.0),
            ModelSpec::AutonomousDiscrete(_) => None,
            ModelSpec::BoundedPerturbation(p) => (p.b2_norm == 0.0).then_some(TAU),
        }
    }

    pub fn is_autonomous(&self) -> bool {
        match self {
            ModelSpec::AutonomousDiscrete(_) => true,
            ModelSpec::BoundedPerturbation(p) => p.b1_norm == 0.0 && p.b2_norm == 0.0,
            _ => false,
        }
    }

    pub fn has_generator(&self) -> bool {
        !matches!(self, ModelSpec::QuasiperiodicExact(_) | ModelSpec::DirectSumQuasiperiodic(_))
    }

    pub fn has_closed_form(&self) -> bool {
        match self {
            ModelSpec::DrivenTwoLevel(_)
            | ModelSpec::QuasiperiodicExact(_)
            | ModelSpec::DirectSumQuasiperiodic(_)
            | ModelSpec::AutonomousDiscrete(_) => true,
            ModelSpec::KickedLinear(_) => false,
            ModelSpec::BoundedPerturbation(_) => self.is_autonomous(),
        }
    }

    /// Unperturbed part `H₀`.
    pub fn h0(&self) -> Result<HermitianOperator> {
        match self {
            ModelSpec::DrivenTwoLevel(p) => HermitianOperator::new(p.h0()),
            ModelSpec::KickedLinear(p) => {
                let d: Vec<f64> = (0..p.dim()).map(|j| (p.momentum(j) * p.momentum(j)) as f64).collect();
                Ok(HermitianOperator::from_real_diagonal(&d)?)
            }
            ModelSpec::AutonomousDiscrete(p) => Ok(p.h0().clone()),
            ModelSpec::BoundedPerturbation(p) => Ok(p.base.h0().clone()),
            _ => Err(Error::GeneratorNotAvailable { model: self.name() }),
        }
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<HermitianOperator> {
        if !t.is_finite() {
            return Err(Error::NonFinite { what: "time" });
        }
        match self {
            ModelSpec::DrivenTwoLevel(p) => HermitianOperator::new(p.hamiltonian(t)),
            ModelSpec::KickedLinear(_) => {
                if t.fract() == 0.0 && t >= 1.0 {
                    return Err(Error::KickInstant { t });
                }
                self.h0()
            }
            ModelSpec::AutonomousDiscrete(p) => Ok(p.h0().clone()),
            ModelSpec::BoundedPerturbation(p) => HermitianOperator::new(p.base.h0().matrix() + p.perturbation(t)),
            _ => Err(Error::GeneratorNotAvailable { model: self.name() }),
        }
    }

    /// `V'(t)` for the variants that expose it.
    pub fn perturbation_derivative(&self, t: f64) -> Result<HermitianOperator> {
        match self {
            ModelSpec::DrivenTwoLevel(p) => HermitianOperator::new(p.drive_derivative(t)),
            ModelSpec::BoundedPerturbation(p) => HermitianOperator::new(p.perturbation_derivative(t)),
            ModelSpec::AutonomousDiscrete(p) => Ok(HermitianOperator::zeros(p.dim())),
            _ => Err(Error::DerivativeNotAvailable { model: self.name() }),
        }
    }

    /// `sup_t ‖V(t)‖` (an upper bound for `BoundedPerturbation`).
    pub fn perturbation_sup_norm(&self) -> Result<f64> {
        match self {
            ModelSpec::DrivenTwoLevel(p) => Ok(0.5 * p.drive_amplitude.abs()),
            ModelSpec::BoundedPerturbation(p) => Ok(p.b1_norm + p.b2_norm),
            ModelSpec::AutonomousDiscrete(_) => Ok(0.0),
            _ => Err(Error::GeneratorNotAvailable { model: self.name() }),
        }
    }

    /// `sup_t ‖V'(t)‖` (an upper bound for `BoundedPerturbation`).
    pub fn perturbation_derivative_sup_norm(&self) -> Result<f64> {
        match self {
            ModelSpec::DrivenTwoLevel(p) => Ok(0.5 * (p.drive_amplitude * p.drive_frequency).abs()),
            ModelSpec::BoundedPerturbation(p) => Ok(p.b1_norm + 2.0 * p.b2_norm),
            ModelSpec::AutonomousDiscrete(_) => Ok(0.0),
            _ => Err(Error::DerivativeNotAvailable { model: self.name() }),
        }
    }

    /// Closed-form `U(t, 0)`.
    pub fn exact_propagator(&self, t: f64) -> Result<UnitaryOperator> {
        if !t.is_finite() {
            return Err(Error::NonFinite { what: "time" });
        }
        if t == 0.0 {
            return Ok(UnitaryOperator::identity(self.dim()));
        }
        match self {
            ModelSpec::DrivenTwoLevel(p) => Ok(p.propagator(t)),
            ModelSpec::QuasiperiodicExact(p) => Ok(p.propagator(t)),
            ModelSpec::DirectSumQuasiperiodic(b) => Ok(direct_sum_propagator(b, t)),
            ModelSpec::AutonomousDiscrete(p) => crate::linalg::expm_i_hermitian(p.h0(), t),
            ModelSpec::BoundedPerturbation(p) if self.is_autonomous() => {
                crate::linalg::expm_i_hermitian(p.base.h0(), t)
            }
            _ => Err(Error::NoClosedForm { model: self.name() }),
        }
    }
}

/// `⊕_l Ũ_l(t, 0)` over the supplied 2×2 blocks.
pub fn direct_sum_propagator(blocks: &[QuasiperiodicExactParams], t: f64) -> UnitaryOperator {
    let parts: Vec<UnitaryOperator> = blocks.iter().map(|b| b.propagator(t)).collect();
    UnitaryOperator::block_diagonal(&parts)
}
