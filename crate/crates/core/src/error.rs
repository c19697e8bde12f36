use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NonHermitianInput { defect: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NonUnitaryInput { defect: f64 },

    #[error("matrix is singular (smallest singular value {sigma_min:.3e})")]
    SingularInput { sigma_min: f64 },

    #[error("eigen-iteration did not converge for a {dim}x{dim} matrix")]
    ConvergenceFailure { dim: usize },

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("model {model} exposes no pointwise generator H(t)")]
    GeneratorNotAvailable { model: &'static str },

    #[error("t = {t} is a kick instant; H(t) is a delta there")]
    KickInstant { t: f64 },

    #[error("model {model} has no closed-form propagator")]
    NoClosedForm { model: &'static str },

    #[error("kick index {index} outside the supplied sequence (length {len})")]
    IndexOutOfSequence { index: usize, len: usize },

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("norm drift {drift:.3e} exceeds {limit:.1e}; reduce the step")]
    NormDriftExceeded { drift: f64, limit: f64 },

    #[error("time {t} is not on the cached grid")]
    TimeNotOnGrid { t: f64 },

    #[error("vector is not an eigenvector (residual {residual:.3e})")]
    NotAnEigenvector { residual: f64 },

    #[error("eigenbasis has {found} vectors for dimension {dim}")]
    IncompleteBasis { dim: usize, found: usize },

    #[error("{points} quadrature points alias Fourier cutoff {cutoff}; need at least {need}")]
    AliasedQuadrature { points: usize, cutoff: usize, need: usize },

    #[error("expansion residual {residual:.3e} exceeds {limit:.1e}")]
    ExpansionResidualTooLarge { residual: f64, limit: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("model {model} does not expose V'(t)")]
    DerivativeNotAvailable { model: &'static str },

    #[error("series grids differ")]
    GridMismatch,

    #[error("series spans {decades:.2} decades of t; need at least 2")]
    HorizonTooShort { decades: f64 },

    #[error("grid shift {shift} inconsistent with grid of {cells} cells")]
    ShiftMismatch { shift: usize, cells: usize },

    #[error("enlarged dimension {dim} exceeds {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
