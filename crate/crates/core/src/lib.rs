//! Bayesian chance-constrained system design.
//!
//! The pipeline: build a posterior over unknown system parameters (exact
//! conjugate, mean-field variational, or Metropolis-Hastings), evaluate how
//! probable constraint satisfaction is under it, and pick the cheapest design
//! meeting a confidence level. Two sides of that pipeline get particular
//! attention:
//!
//! - **Feasibility-set geometry** ([`chance`]): for a linear Gaussian
//!   constraint the exact and mean-field regions are second-order-cone sets
//!   (convex), while regions built from posterior *samples* lose convexity.
//!   The region harness rasterizes all three and hunts for midpoint
//!   counterexamples.
//! - **M/M/c staffing** ([`queueing`]): pick the smallest server count whose
//!   delay probability stays below a cap, with parameter uncertainty handled
//!   by plug-in estimates, average constraints, or a posterior chance
//!   constraint. The sweep harnesses ([`experiments`]) measure how often each
//!   formulation violates the true requirements, and how the chance
//!   constraint's conservatism pays off as data accumulates.
//!
//! Numeric kernels are generic over the scalar type ([`Real`]); the aliases
//! below pin the `f64` instantiations used by the harnesses and the CLI.

pub mod chance;
pub mod experiments;
pub mod queueing;
pub mod rng;
pub mod sampling;
mod scalar;
pub mod stats;
pub mod variational;

pub use rng::RngHandle;
pub use scalar::Real;

/// `f64` multivariate Gaussian.
pub type MvGaussian = stats::MultivariateGaussian<f64>;
/// `f64` Gamma distribution.
pub type Gamma = stats::GammaDist<f64>;
/// `f64` mean-field (diagonal) Gaussian.
pub type MeanField = variational::DiagonalGaussian<f64>;
/// `f64` Metropolis-Hastings sample set.
pub type Samples = sampling::SampleSet<f64>;
/// `f64` linear chance constraint.
pub type Constraint = chance::LinearChanceConstraint<f64>;
/// `f64` rasterized feasibility region.
pub type Region = chance::RegionGrid<f64>;
/// `f64` queueing dataset.
pub type Dataset = queueing::QueueDataset<f64>;
