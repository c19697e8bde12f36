// Negated comparisons deliberately reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod tolerance;

pub use error::{Error, Result};
pub mod models;
pub mod propagator;
pub mod spectral;
pub mod diagnostics;
pub mod enlarged;
pub mod cli;
