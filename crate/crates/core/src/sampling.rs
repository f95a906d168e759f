//! Random-walk Metropolis-Hastings.
//!
//! This is the Monte Carlo baseline the feasibility-region experiments
//! compare against: a single chain with an isotropic Gaussian proposal and
//! the usual `min(1, exp(Δ log-density))` acceptance. Burn-in draws are
//! discarded entirely. No adaptation, no diagnostics beyond the acceptance
//! rate — the point downstream is what the raw empirical measure does to a
//! chance-constraint region.

use thiserror::Error;

use crate::rng::RngHandle;
use crate::scalar::Real;

/// Chain configuration.
#[derive(Debug, Clone)]
pub struct MhConfig<T> {
    /// Total steps, including burn-in.
    pub steps: usize,
    /// Leading steps to discard (must be `< steps`).
    pub burn_in: usize,
    /// Standard deviation of the isotropic Gaussian proposal.
    pub proposal_std: T,
    /// Starting state.
    pub init: Vec<T>,
    pub seed: u64,
}

impl<T: Real> MhConfig<T> {
    /// Defaults used by the 2-D demos: 8000 steps, 3000 burn-in,
    /// unit proposal standard deviation.
    pub fn with_defaults(init: Vec<T>, seed: u64) -> Self {
        Self {
            steps: 8000,
            burn_in: 3000,
            proposal_std: T::one(),
            init,
            seed,
        }
    }
}

/// Retained draws of one chain, stored flat (row-major) since downstream
/// constraint evaluators stream over them millions of times.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    data: Vec<T>,
    count: usize,
    dim: usize,
    acceptance_rate: f64,
}

impl<T: Real> SampleSet<T> {
    pub fn from_draws(draws: Vec<Vec<T>>, acceptance_rate: f64) -> Self {
        let count = draws.len();
        let dim = draws.first().map_or(0, Vec::len);
        assert!(
            draws.iter().all(|d| d.len() == dim),
            "all draws must share one dimension"
        );
        let mut data = Vec::with_capacity(count * dim);
        for d in &draws {
            data.extend_from_slice(d);
        }
        Self {
            data,
            count,
            dim,
            acceptance_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn draw(&self, index: usize) -> &[T] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn draws(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// Fraction of accepted proposals over all steps.
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_rate
    }

    /// Componentwise sample mean (in `f64`).
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for draw in self.draws() {
            for (acc, &v) in m.iter_mut().zip(draw) {
                *acc += v.as_f64();
            }
        }
        let n = self.count as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Sample covariance (denominator `n`, in `f64`).
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        let mean = self.mean();
        let mut cov = vec![vec![0.0; d]; d];
        for draw in self.draws() {
            let e: Vec<f64> = draw
                .iter()
                .zip(&mean)
                .map(|(&v, &m)| v.as_f64() - m)
                .collect();
            for i in 0..d {
                for j in 0..d {
                    cov[i][j] += e[i] * e[j];
                }
            }
        }
        let n = self.count as f64;
        for row in &mut cov {
            for v in row {
                *v /= n;
            }
        }
        cov
    }
}

#[derive(Debug, Clone, Error)]
pub enum SamplingError {
    #[error("burn-in ({burn_in}) must be smaller than total steps ({steps})")]
    BurnInTooLarge { burn_in: usize, steps: usize },
    #[error("proposal standard deviation must be positive, got {value}")]
    NonPositiveProposal { value: f64 },
    #[error("initial state must be non-empty")]
    EmptyInit,
    #[error("log-density is not finite at the initial state {state}")]
    NonFiniteAtInit { state: String },
    #[error("log-density returned NaN at state {state}")]
    NanLogDensity { state: String },
    #[error("thinning stride must be at least 1")]
    ZeroStride,
}

/// Run one random-walk chain against `log_density`.
///
/// Returns exactly `steps - burn_in` draws. Identical configs (seed included)
/// produce bit-identical output. A NaN from `log_density` aborts with the
/// offending state in the error; `-∞` is a legal "zero density" and simply
/// rejects the proposal.
pub fn metropolis_hastings<T, F>(
    log_density: F,
    config: &MhConfig<T>,
) -> Result<SampleSet<T>, SamplingError>
where
    T: Real,
    F: Fn(&[T]) -> T,
{
    if config.burn_in >= config.steps {
        return Err(SamplingError::BurnInTooLarge {
            burn_in: config.burn_in,
            steps: config.steps,
        });
    }
    if config.proposal_std.is_nan() || config.proposal_std <= T::zero() {
        return Err(SamplingError::NonPositiveProposal {
            value: config.proposal_std.as_f64(),
        });
    }
    if config.init.is_empty() {
        return Err(SamplingError::EmptyInit);
    }

    let mut rng = RngHandle::new(config.seed);
    let dim = config.init.len();
    let mut current = config.init.clone();
    let mut current_lp = log_density(&current);
    if !current_lp.is_finite() {
        return Err(SamplingError::NonFiniteAtInit {
            state: format!("{:?}", current),
        });
    }

    let retained = config.steps - config.burn_in;
    let mut data = Vec::with_capacity(retained * dim);
    let mut accepted = 0usize;
    let mut proposal = vec![T::zero(); dim];

    for step in 0..config.steps {
        for (p, &c) in proposal.iter_mut().zip(&current) {
            *p = c + config.proposal_std * T::of(rng.standard_normal());
        }
        let lp = log_density(&proposal);
        if lp.is_nan() {
            return Err(SamplingError::NanLogDensity {
                state: format!("{:?}", proposal),
            });
        }
        let log_u = T::of(rng.next_open01().ln());
        if log_u < lp - current_lp {
            std::mem::swap(&mut current, &mut proposal);
            current_lp = lp;
            accepted += 1;
        }
        if step >= config.burn_in {
            data.extend_from_slice(&current);
        }
    }

    Ok(SampleSet {
        data,
        count: retained,
        dim,
        acceptance_rate: accepted as f64 / config.steps as f64,
    })
}

/// Keep every `stride`-th draw starting at index 0.
pub fn thin<T: Real>(samples: &SampleSet<T>, stride: usize) -> Result<SampleSet<T>, SamplingError> {
    if stride == 0 {
        return Err(SamplingError::ZeroStride);
    }
    let mut data = Vec::new();
    let mut count = 0;
    for (i, row) in samples.draws().enumerate() {
        if i % stride == 0 {
            data.extend_from_slice(row);
            count += 1;
        }
    }
    Ok(SampleSet {
        data,
        count,
        dim: samples.dim,
        acceptance_rate: samples.acceptance_rate,
    })
}
