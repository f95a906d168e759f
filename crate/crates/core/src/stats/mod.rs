//! Foundational distributions and special functions.

mod gamma;
mod gaussian;
mod special;

pub use gamma::GammaDist;
pub use gaussian::MultivariateGaussian;
pub use special::{erf, erfc, std_normal_cdf, std_normal_quantile};

pub(crate) use special::normal_cdf;
#[cfg(test)]
pub(crate) use special::normal_quantile;

use thiserror::Error;

/// Errors for distribution construction and evaluation.
#[derive(Debug, Clone, Error)]
pub enum StatsError {
    #[error("{what} must be finite, got {value}")]
    NonFiniteInput { what: &'static str, value: f64 },
    #[error("probability must lie strictly inside (0, 1), got {value}")]
    ProbabilityOutOfRange { value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("covariance is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("covariance is not positive definite (pivot {pivot} reduced to {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("{what} must be positive and finite, got {value}")]
    InvalidParameter { what: &'static str, value: f64 },
}
