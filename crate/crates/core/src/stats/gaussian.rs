//! Multivariate Gaussian with a Cholesky-backed parameterization.
//!
//! The covariance is factored once at construction; log-density, sampling,
//! solves, and the precision matrix all reuse the factor. Dimensions here are
//! tiny (the demos are 2-D), so everything is plain dense arithmetic.

use crate::rng::RngHandle;
use crate::scalar::Real;

use super::special::LN_2PI;
use super::StatsError;

/// Gaussian distribution over `R^d` with positive-definite covariance.
#[derive(Debug, Clone)]
pub struct MultivariateGaussian<T> {
    mean: Vec<T>,
    cov: Vec<T>,  // row-major d×d
    chol: Vec<T>, // lower-triangular factor L with cov = L·Lᵀ, row-major
    dim: usize,
}

impl<T: Real> MultivariateGaussian<T> {
    /// Construct from a mean vector and covariance given as rows.
    ///
    /// The covariance must be exactly symmetric and positive definite: the
    /// Cholesky factorization is attempted with zero pivot tolerance and any
    /// non-positive pivot rejects the matrix.
    pub fn new(mean: Vec<T>, cov_rows: Vec<Vec<T>>) -> Result<Self, StatsError> {
        let dim = mean.len();
        if dim == 0 {
            return Err(StatsError::EmptyDimension);
        }
        if cov_rows.len() != dim || cov_rows.iter().any(|r| r.len() != dim) {
            return Err(StatsError::DimensionMismatch {
                expected: dim,
                got: cov_rows.len(),
            });
        }
        if mean.iter().any(|m| !m.is_finite())
            || cov_rows.iter().flatten().any(|c| !c.is_finite())
        {
            return Err(StatsError::NonFiniteInput {
                what: "Gaussian parameters",
                value: f64::NAN,
            });
        }
        let mut cov = Vec::with_capacity(dim * dim);
        for row in &cov_rows {
            cov.extend_from_slice(row);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if cov[i * dim + j] != cov[j * dim + i] {
                    return Err(StatsError::NotSymmetric { row: i, col: j });
                }
            }
        }
        let chol = cholesky(&cov, dim)?;
        Ok(Self {
            mean,
            cov,
            chol,
            dim,
        })
    }

    /// Gaussian with diagonal covariance.
    pub fn diagonal(mean: Vec<T>, variances: Vec<T>) -> Result<Self, StatsError> {
        let d = mean.len();
        if variances.len() != d {
            return Err(StatsError::DimensionMismatch {
                expected: d,
                got: variances.len(),
            });
        }
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { variances[i] } else { T::zero() })
                    .collect()
            })
            .collect();
        Self::new(mean, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn cov(&self, i: usize, j: usize) -> T {
        self.cov[i * self.dim + j]
    }

    /// Lower-triangular Cholesky factor, row-major.
    pub fn cholesky_factor(&self) -> &[T] {
        &self.chol
    }

    /// `log det Σ`, from the factor.
    pub fn log_det(&self) -> T {
        let mut acc = T::zero();
        for j in 0..self.dim {
            acc += self.chol[j * self.dim + j].ln();
        }
        acc * T::of(2.0)
    }

    /// Solve `Σ x = rhs` via the factor.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, StatsError> {
        if rhs.len() != self.dim {
            return Err(StatsError::DimensionMismatch {
                expected: self.dim,
                got: rhs.len(),
            });
        }
        let mut w = rhs.to_vec();
        forward_sub(&self.chol, self.dim, &mut w);
        backward_sub_transposed(&self.chol, self.dim, &mut w);
        Ok(w)
    }

    /// Precision matrix `Σ⁻¹`, row-major.
    pub fn precision(&self) -> Vec<T> {
        let d = self.dim;
        let mut out = vec![T::zero(); d * d];
        for j in 0..d {
            let mut e = vec![T::zero(); d];
            e[j] = T::one();
            let col = self.solve(&e).expect("unit vector has matching dimension");
            for i in 0..d {
                out[i * d + j] = col[i];
            }
        }
        out
    }

    /// Diagonal of the precision matrix.
    pub fn precision_diag(&self) -> Vec<T> {
        let p = self.precision();
        (0..self.dim).map(|i| p[i * self.dim + i]).collect()
    }

    /// Log-density at `x`.
    pub fn log_pdf(&self, x: &[T]) -> Result<T, StatsError> {
        if x.len() != self.dim {
            return Err(StatsError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut w: Vec<T> = x
            .iter()
            .zip(&self.mean)
            .map(|(&xi, &mi)| xi - mi)
            .collect();
        forward_sub(&self.chol, self.dim, &mut w);
        let quad: T = w.iter().map(|&v| v * v).sum();
        let mut log_det_half = T::zero();
        for j in 0..self.dim {
            log_det_half += self.chol[j * self.dim + j].ln();
        }
        let d = T::of(self.dim as f64);
        Ok(-(d * T::of(LN_2PI) + quad) / T::of(2.0) - log_det_half)
    }

    /// Draw `count` vectors, `x = μ + L·z` with standard normal `z`.
    ///
    /// Deterministic given the handle's seed and prior stream position.
    pub fn sample(&self, rng: &mut RngHandle, count: usize) -> Vec<Vec<T>> {
        let d = self.dim;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let z: Vec<T> = (0..d).map(|_| T::of(rng.standard_normal())).collect();
            let mut x = self.mean.clone();
            for (i, xi) in x.iter_mut().enumerate() {
                for (j, &zj) in z.iter().enumerate().take(i + 1) {
                    *xi += self.chol[i * d + j] * zj;
                }
            }
            out.push(x);
        }
        out
    }
}

/// Dense Cholesky with zero pivot tolerance.
fn cholesky<T: Real>(cov: &[T], d: usize) -> Result<Vec<T>, StatsError> {
    let mut l = vec![T::zero(); d * d];
    for j in 0..d {
        let mut s = cov[j * d + j];
        for k in 0..j {
            s -= l[j * d + k] * l[j * d + k];
        }
        if s <= T::zero() {
            return Err(StatsError::NotPositiveDefinite {
                pivot: j,
                value: s.as_f64(),
            });
        }
        let ljj = s.sqrt();
        l[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut v = cov[i * d + j];
            for k in 0..j {
                v -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = v / ljj;
        }
    }
    Ok(l)
}

/// Solve `L w = b` in place.
fn forward_sub<T: Real>(l: &[T], d: usize, b: &mut [T]) {
    for i in 0..d {
        let mut v = b[i];
        for j in 0..i {
            v -= l[i * d + j] * b[j];
        }
        b[i] = v / l[i * d + i];
    }
}

/// Solve `Lᵀ w = b` in place.
fn backward_sub_transposed<T: Real>(l: &[T], d: usize, b: &mut [T]) {
    for i in (0..d).rev() {
        let mut v = b[i];
        for j in (i + 1)..d {
            v -= l[j * d + i] * b[j];
        }
        b[i] = v / l[i * d + i];
    }
}
