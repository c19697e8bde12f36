//! Two-frequency model whose monodromy is `u₁(θ₁) = diag(e^{iθ₁}, e^{−iθ₁})`.
//!
//! Only the propagator is available. Along the fibre θ = (θ₁, 0) it is
//!
//! ```text
//! U(kT₂, 0)     = diag(e^{ ik(θ₁+(k−1)πα)}, e^{−ik(θ₁+(k−1)πα)})
//! U(kT₂ + δ, 0) = v(δ; θ₁ + 2πkα) · U(kT₂, 0),     0 ≤ δ < T₂
//! v(δ; θ)       = diag(e^{ i(δ/T₂)(θ+(δ/T₂−1)πα)}, e^{−i(δ/T₂)(θ+(δ/T₂−1)πα)})
//! ```
//!
//! with `T₂ = 2π/ω₂` and `α = ω₁/ω₂`. The same formula holds for `k < 0`.

use std::f64::consts::{PI, TAU};

use super::floor_div;
use crate::error::{Error, Result};
use crate::linalg::UnitaryOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiperiodicExactParams {
    pub omega1: f64,
    pub omega2: f64,
    pub theta1: f64,
}

impl QuasiperiodicExactParams {
    pub fn new(omega1: f64, omega2: f64, theta1: f64) -> Result<Self> {
        if !(omega1 > 0.0 && omega1.is_finite()) || !(omega2 > 0.0 && omega2.is_finite()) {
            return Err(Error::InvalidModel("frequencies must be positive and finite".into()));
        }
        if !(0.0..TAU).contains(&theta1) {
            return Err(Error::InvalidModel("theta1 must lie in [0, 2π)".into()));
        }
        Ok(Self { omega1, omega2, theta1 })
    }

    /// Second period `T₂ = 2π/ω₂`.
    pub fn t2(&self) -> f64 {
        TAU / self.omega2
    }

    /// Frequency ratio `α = ω₁/ω₂`.
    pub fn alpha(&self) -> f64 {
        self.omega1 / self.omega2
    }

    /// Same frequencies on another fibre, angle reduced to `[0, 2π)`.
    pub fn with_theta1(&self, theta1: f64) -> Self {
        Self { theta1: crate::linalg::wrap_phase(theta1), ..*self }
    }

    /// `u₁(θ)`, the one-period monodromy on fibre θ.
    pub fn u1(theta: f64) -> UnitaryOperator {
        UnitaryOperator::diagonal_phases(&[theta, -theta])
    }

    /// Phase of the upper diagonal entry of `v(δ; θ)`.
    fn interpolation_phase(&self, delta: f64, theta: f64) -> f64 {
        let s = delta / self.t2();
        s * (theta + (s - 1.0) * PI * self.alpha())
    }

    /// The interpolating path `v(δ; θ)` from `Id` (δ = 0) to `u₁(θ)` (δ = T₂).
    pub fn interpolation(&self, delta: f64, theta: f64) -> UnitaryOperator {
        let p = self.interpolation_phase(delta, theta);
        UnitaryOperator::diagonal_phases(&[p, -p])
    }

    /// Phase of the upper entry of `U(kT₂, 0)`, reduced mod 2π.
    ///
    /// `k(θ₁ + (k−1)πα) = kθ₁ + 2π·(k(k−1)/2)·α`; the triangular number is an
    /// exact integer, so only its product with α is rounded.
    fn stroboscopic_phase(&self, k: i64) -> f64 {
        let tri = (k as i128 * (k as i128 - 1) / 2) as f64;
        let frac = (tri * self.alpha()).rem_euclid(1.0);
        (k as f64 * self.theta1).rem_euclid(TAU) + TAU * frac
    }

    /// `U(kT₂, 0)`.
    pub fn stroboscopic(&self, k: i64) -> UnitaryOperator {
        let p = self.stroboscopic_phase(k);
        UnitaryOperator::diagonal_phases(&[p, -p])
    }

    /// Upper-entry phase of `U(t, 0)`; the lower entry carries its negative.
    pub fn propagator_phase(&self, t: f64) -> f64 {
        let (k, delta) = floor_div(t, self.t2());
        // v(δ; θ) is not 2π-periodic in θ, so the fibre angle stays unreduced.
        let theta_k = self.theta1 + TAU * k as f64 * self.alpha();
        self.interpolation_phase(delta, theta_k) + self.stroboscopic_phase(k)
    }

    /// `U(t, 0)` through the stroboscopic factorization.
    pub fn propagator(&self, t: f64) -> UnitaryOperator {
        let p = self.propagator_phase(t);
        UnitaryOperator::diagonal_phases(&[p, -p])
    }

    /// Direct evaluation of `(t/T₂)(θ₁ + ((t/T₂) − 1)πα)`, the closed-form
    /// phase of the state `U(t,0)(1,0)`.
    pub fn closed_form_phase(&self, t: f64) -> f64 {
        let s = t / self.t2();
        s * (self.theta1 + (s - 1.0) * PI * self.alpha())
    }
}
