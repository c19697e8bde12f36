//! Numerical tolerances shared by every module.
//!
//! Downstream checks read their thresholds from [`Tolerances::DEFAULT`] unless a
//! caller passes an explicit value, so a single struct decides what "unitary" or
//! "Hermitian" means throughout the crate.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative Frobenius bound on `M - M†` for Hermitian operators.
    pub hermiticity: f64,
    /// Frobenius bound on `U†U - Id` for unitary operators.
    pub unitarity: f64,
    /// Eigenphases closer than this are treated as one degenerate cluster.
    pub phase_cluster_gap: f64,
    /// Smallest singular value accepted by the polar factorization.
    pub min_singular_value: f64,
    /// Residual bound for `U ξ = e^{-iα} ξ`.
    pub eigen_residual: f64,
    /// Norm drift that aborts a propagation.
    pub max_norm_drift: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-12,
        unitarity: 1e-10,
        phase_cluster_gap: 1e-9,
        min_singular_value: 1e-14,
        eigen_residual: 1e-8,
        max_norm_drift: 1e-6,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
