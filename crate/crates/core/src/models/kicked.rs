//! Kicked free particle on the circle, `H(t) = p² + x Σ_{n≥1} ε_n δ(t − n)`.
//!
//! States live in the Fourier basis `e^{inx}`, `|n| ≤ M`, stored at index
//! `n + M`. One step is free evolution over unit time followed by the kick,
//! which is applied on a `2M+1` point position grid through the DFT.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{cis, ComplexVector, C64};

/// Kick strengths `ε_n` for `n = 1, 2, …`.
#[derive(Debug, Clone, PartialEq)]
pub enum KickSequence {
    /// `ε_n = 0`; pure free evolution.
    Zero,
    /// `ε_n = 1`; time-periodic with period 1.
    One,
    /// Caller-supplied `ε_1, ε_2, …`; stepping past the end is an error.
    List(Vec<f64>),
}

impl KickSequence {
    /// `ε_n` for `n ≥ 1`.
    pub fn get(&self, n: usize) -> Result<f64> {
        match self {
            _ if n == 0 => Err(Error::IndexOutOfSequence { index: 0, len: self.len().unwrap_or(0) }),
            KickSequence::Zero => Ok(0.0),
            KickSequence::One => Ok(1.0),
            KickSequence::List(v) => {
                v.get(n - 1).copied().ok_or(Error::IndexOutOfSequence { index: n, len: v.len() })
            }
        }
    }

    /// Number of available kicks, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            KickSequence::List(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn is_periodic(&self) -> bool {
        !matches!(self, KickSequence::List(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KickedLinearParams {
    pub cutoff: usize,
    pub kicks: KickSequence,
}

impl KickedLinearParams {
    pub fn new(cutoff: usize, kicks: KickSequence) -> Result<Self> {
        if let KickSequence::List(v) = &kicks {
            if v.iter().any(|e| !e.is_finite()) {
                return Err(Error::InvalidModel("kick strengths must be finite".into()));
            }
        }
        if cutoff > 2047 {
            return Err(Error::DimensionTooLarge { dim: 2 * cutoff + 1, limit: 4095 });
        }
        Ok(Self { cutoff, kicks })
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    /// Momentum value of basis index `j`.
    pub fn momentum(&self, j: usize) -> i64 {
        j as i64 - self.cutoff as i64
    }

    /// Position grid point `x_j = 2πj/(2M+1)`.
    pub fn position(&self, j: usize) -> f64 {
        std::f64::consts::TAU * j as f64 / self.dim() as f64
    }
}

/// Precomputed FFT plans and free phases for repeated stepping.
pub struct KickStepper {
    params: KickedLinearParams,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    free_phases: Vec<C64>,
}

impl KickStepper {
    pub fn new(params: &KickedLinearParams) -> Self {
        let n = params.dim();
        let mut planner = FftPlanner::new();
        let free_phases = (0..n)
            .map(|j| {
                let p = params.momentum(j);
                cis(-((p * p) as f64))
            })
            .collect();
        Self {
            params: params.clone(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            free_phases,
        }
    }

    /// Multiplication by `e^{−iεx}` in position space.
    pub fn kick(&self, epsilon: f64, psi: &mut ComplexVector) {
        if epsilon == 0.0 {
            return;
        }
        let n = self.params.dim();
        let buf = psi.as_mut_slice();
        self.inverse.process(buf);
        for (j, z) in buf.iter_mut().enumerate() {
            *z *= cis(-epsilon * self.params.position(j));
        }
        self.forward.process(buf);
        let scale = 1.0 / n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    pub fn free(&self, psi: &mut ComplexVector) {
        for (z, w) in psi.iter_mut().zip(&self.free_phases) {
            *z *= w;
        }
    }

    /// Step `n ≥ 1`: free evolution over `[n−1, n]`, then kick `ε_n`.
    pub fn step(&self, n: usize, psi: &mut ComplexVector) -> Result<()> {
        if psi.len() != self.params.dim() {
            return Err(Error::DimensionMismatch { expected: self.params.dim(), found: psi.len() });
        }
        let eps = self.params.kicks.get(n)?;
        self.free(psi);
        self.kick(eps, psi);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, ComplexMatrix};

    /// Dense kick matrix `K_{nm} = (1/N) Σ_j e^{−inx_j} e^{−iεx_j} e^{imx_j}`.
    fn dense_kick(params: &KickedLinearParams, eps: f64) -> ComplexMatrix {
        let n = params.dim();
        ComplexMatrix::from_fn(n, n, |r, c| {
            let (pr, pc) = (params.momentum(r) as f64, params.momentum(c) as f64);
            (0..n)
                .map(|j| {
                    let x = params.position(j);
                    cis(-pr * x - eps * x + pc * x)
                })
                .sum::<C64>()
                / n as f64
        })
    }

    #[test]
    fn zero_kick_is_diagonal_phase() {
        let params = KickedLinearParams::new(4, KickSequence::Zero).unwrap();
        let st = KickStepper::new(&params);
        for j in 0..params.dim() {
            let mut psi = basis_vector(params.dim(), j);
            st.step(1, &mut psi).unwrap();
            let m = params.momentum(j);
            let expect = basis_vector(params.dim(), j) * cis(-((m * m) as f64));
            assert!((psi - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn unit_kick_matches_dense_oracle() {
        let params = KickedLinearParams::new(6, KickSequence::One).unwrap();
        let st = KickStepper::new(&params);
        let mut psi = basis_vector(params.dim(), params.cutoff);
        st.step(1, &mut psi).unwrap();
        let expect = dense_kick(&params, 1.0) * basis_vector(params.dim(), params.cutoff);
        assert!((&psi - expect).norm() < 1e-12);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arbitrary_kick_matches_dense_oracle() {
        let params = KickedLinearParams::new(5, KickSequence::List(vec![0.37, -1.2])).unwrap();
        let st = KickStepper::new(&params);
        let n = params.dim();
        let psi0 = ComplexVector::from_fn(n, |j, _| C64::new((j as f64).sin(), (j as f64 * 0.3).cos()));
        let psi0 = psi0.unscale(psi0.norm());
        let mut psi = psi0.clone();
        st.kick(0.37, &mut psi);
        assert!((psi - dense_kick(&params, 0.37) * &psi0).norm() < 1e-12);
    }

    #[test]
    fn two_steps_compose() {
        let params = KickedLinearParams::new(5, KickSequence::List(vec![1.0, -1.0, 0.0])).unwrap();
        let st = KickStepper::new(&params);
        let mut a = basis_vector(params.dim(), 3);
        st.step(1, &mut a).unwrap();
        st.step(2, &mut a).unwrap();
        let mut b = basis_vector(params.dim(), 3);
        st.free(&mut b);
        st.kick(1.0, &mut b);
        st.free(&mut b);
        st.kick(-1.0, &mut b);
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn norm_preserved_over_many_steps() {
        let params = KickedLinearParams::new(20, KickSequence::One).unwrap();
        let st = KickStepper::new(&params);
        let mut psi = basis_vector(params.dim(), 20);
        for n in 1..=100 {
            let before = psi.norm();
            st.step(n, &mut psi).unwrap();
            assert!((psi.norm() - before).abs() <= 1e-12);
        }
    }

    #[test]
    fn sequence_bounds() {
        let s = KickSequence::List(vec![1.0]);
        assert!(matches!(s.get(0), Err(Error::IndexOutOfSequence { .. })));
        assert_eq!(s.get(1).unwrap(), 1.0);
        assert!(matches!(s.get(2), Err(Error::IndexOutOfSequence { index: 2, len: 1 })));
        assert_eq!(KickSequence::One.get(1_000_000).unwrap(), 1.0);
    }
}
