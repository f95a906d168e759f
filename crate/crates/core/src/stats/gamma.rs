//! Gamma distribution in shape/rate parameterization.
//!
//! This is the conjugate family for exponential likelihoods; posteriors over
//! arrival and service rates live here. Sampling uses the Marsaglia-Tsang
//! squeeze method for shape >= 1 and the standard power boost below 1, so
//! the artifact's priors (shape >= 1) hit the fast path.

use serde::{Deserialize, Serialize};

use crate::rng::RngHandle;
use crate::scalar::Real;

use super::StatsError;

/// Gamma(shape, rate) with density proportional to `x^(shape-1)·exp(-rate·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaDist<T> {
    shape: T,
    rate: T,
}

impl<T: Real> GammaDist<T> {
    pub fn new(shape: T, rate: T) -> Result<Self, StatsError> {
        if !shape.is_finite() || shape <= T::zero() {
            return Err(StatsError::InvalidParameter {
                what: "gamma shape",
                value: shape.as_f64(),
            });
        }
        if !rate.is_finite() || rate <= T::zero() {
            return Err(StatsError::InvalidParameter {
                what: "gamma rate",
                value: rate.as_f64(),
            });
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> T {
        self.shape
    }

    pub fn rate(&self) -> T {
        self.rate
    }

    /// `shape / rate`.
    pub fn mean(&self) -> T {
        self.shape / self.rate
    }

    /// One draw. Internal arithmetic is `f64` regardless of `T`.
    pub fn sample_one(&self, rng: &mut RngHandle) -> T {
        let shape = self.shape.as_f64();
        let rate = self.rate.as_f64();
        let value = if shape >= 1.0 {
            gamma_unit_rate(shape, rng)
        } else {
            // Boost: G(a) = G(a+1) · U^(1/a).
            gamma_unit_rate(shape + 1.0, rng) * rng.next_open01().powf(1.0 / shape)
        };
        T::of(value / rate)
    }

    /// `count` draws; all strictly positive, deterministic given the seed.
    pub fn sample(&self, rng: &mut RngHandle, count: usize) -> Vec<T> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }
}

/// Marsaglia-Tsang (2000) for Gamma(shape, 1), shape >= 1.
fn gamma_unit_rate(shape: f64, rng: &mut RngHandle) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (3.0 * d.sqrt());
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.next_open01();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
