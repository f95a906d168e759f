//! Chance-constraint evaluation and feasibility-region geometry.
//!
//! For the linear constraint `ξᵀx - threshold <= 0` with Gaussian `ξ`, the
//! satisfaction probability has the closed form `Φ((t - μᵀx)/√(xᵀΣx))`, so
//! the region `{x : prob >= β}` is a second-order-cone set — convex for
//! `β >= 1/2`. The same probability can instead be estimated from posterior
//! samples, and the resulting empirical region is *not* convex in general;
//! [`convexity_probe`] is the detector for that, working on exact membership
//! functions (never on a raster) so a violation is a real midpoint
//! counterexample, not a pixel artifact.

use serde::Serialize;
use thiserror::Error;

use crate::rng::RngHandle;
use crate::sampling::SampleSet;
use crate::scalar::Real;
use crate::stats::{normal_cdf, MultivariateGaussian, StatsError};
use crate::variational::DiagonalGaussian;

/// Linear constraint `ξᵀx - threshold <= 0` in `dimension` variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearChanceConstraint<T> {
    dimension: usize,
    threshold: T,
}

impl<T: Real> LinearChanceConstraint<T> {
    pub fn new(dimension: usize, threshold: T) -> Result<Self, ChanceError> {
        if dimension == 0 {
            return Err(ChanceError::Stats(StatsError::EmptyDimension));
        }
        Ok(Self {
            dimension,
            threshold,
        })
    }

    /// The 2-D demo constraint `ξᵀx - 1 <= 0`.
    pub fn demo_2d() -> Self {
        Self {
            dimension: 2,
            threshold: T::one(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }
}

#[derive(Debug, Clone, Error)]
pub enum ChanceError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("{what} must be at least {min}, got {got}")]
    TooSmall {
        what: &'static str,
        min: usize,
        got: usize,
    },
    #[error("beta must lie strictly inside (0, 1), got {value}")]
    BetaOutOfRange { value: f64 },
    #[error("box bounds must satisfy lo < hi, got [{lo}, {hi}]")]
    EmptyBox { lo: f64, hi: f64 },
}

fn check_dim<T: Real>(
    x: &[T],
    constraint: &LinearChanceConstraint<T>,
    dist_dim: usize,
) -> Result<(), ChanceError> {
    if x.len() != constraint.dimension || dist_dim != constraint.dimension {
        return Err(ChanceError::Stats(StatsError::DimensionMismatch {
            expected: constraint.dimension,
            got: if x.len() != constraint.dimension {
                x.len()
            } else {
                dist_dim
            },
        }));
    }
    Ok(())
}

/// `P[ξᵀx <= threshold]` for `ξ ~ N(μ, Σ)`.
///
/// At `x = 0` the constraint degenerates to a constant: probability 1 when
/// the threshold is nonnegative, 0 otherwise (no division is attempted).
pub fn analytic_linear_prob<T: Real>(
    x: &[T],
    xi_dist: &MultivariateGaussian<T>,
    constraint: &LinearChanceConstraint<T>,
) -> Result<T, ChanceError> {
    check_dim(x, constraint, xi_dist.dim())?;
    if x.iter().all(|&v| v == T::zero()) {
        return Ok(if constraint.threshold >= T::zero() {
            T::one()
        } else {
            T::zero()
        });
    }
    let mean_proj: T = xi_dist
        .mean()
        .iter()
        .zip(x)
        .map(|(&m, &xi)| m * xi)
        .sum();
    let mut quad = T::zero();
    for i in 0..x.len() {
        for j in 0..x.len() {
            quad += x[i] * xi_dist.cov(i, j) * x[j];
        }
    }
    Ok(normal_cdf(
        (constraint.threshold - mean_proj) / quad.sqrt(),
    ))
}

/// Fraction of sample draws satisfying the constraint at `x`.
pub fn empirical_prob<T: Real>(
    x: &[T],
    samples: &SampleSet<T>,
    constraint: &LinearChanceConstraint<T>,
) -> Result<T, ChanceError> {
    if samples.is_empty() {
        return Err(ChanceError::EmptySampleSet);
    }
    check_dim(x, constraint, samples.dim())?;
    let satisfied = samples
        .draws()
        .filter(|xi| {
            let proj: T = xi.iter().zip(x).map(|(&a, &b)| a * b).sum();
            proj - constraint.threshold <= T::zero()
        })
        .count();
    Ok(T::of(satisfied as f64) / T::of(samples.len() as f64))
}

/// `P[ξᵀx <= threshold]` under a diagonal-Gaussian approximation.
///
/// Equals [`analytic_linear_prob`] with the approximation promoted to a
/// full Gaussian with diagonal covariance.
pub fn vb_linear_prob<T: Real>(
    x: &[T],
    q: &DiagonalGaussian<T>,
    constraint: &LinearChanceConstraint<T>,
) -> Result<T, ChanceError> {
    check_dim(x, constraint, q.dim())?;
    if x.iter().all(|&v| v == T::zero()) {
        return Ok(if constraint.threshold >= T::zero() {
            T::one()
        } else {
            T::zero()
        });
    }
    let mean_proj: T = q.means().iter().zip(x).map(|(&m, &xi)| m * xi).sum();
    let quad: T = q
        .variances()
        .iter()
        .zip(x)
        .map(|(&v, &xi)| v * xi * xi)
        .sum();
    Ok(normal_cdf(
        (constraint.threshold - mean_proj) / quad.sqrt(),
    ))
}

/// Precomputed membership test for the empirical region
/// `{x : empirical_prob(x) >= beta}`.
///
/// Algebraically identical to thresholding [`empirical_prob`] — the count
/// threshold is derived from the same floating-point comparison — but laid
/// out for the convexity probe's access pattern: draws are stored
/// column-wise and the scan aborts as soon as enough violating draws have
/// been seen to rule membership out. Probing a 5000-draw region millions of
/// times is what makes the region experiments feasible.
pub struct EmpiricalMembership<T> {
    columns: Vec<Vec<T>>,
    threshold: T,
    /// Membership fails once more than this many draws violate.
    max_violations: usize,
}

impl<T: Real> EmpiricalMembership<T> {
    pub fn new(
        samples: &SampleSet<T>,
        constraint: &LinearChanceConstraint<T>,
        beta: T,
    ) -> Result<Self, ChanceError> {
        if samples.is_empty() {
            return Err(ChanceError::EmptySampleSet);
        }
        if samples.dim() != constraint.dimension() {
            return Err(ChanceError::Stats(StatsError::DimensionMismatch {
                expected: constraint.dimension(),
                got: samples.dim(),
            }));
        }
        if !(beta > T::zero() && beta < T::one()) {
            return Err(ChanceError::BetaOutOfRange {
                value: beta.as_f64(),
            });
        }
        let n = samples.len();
        let mut columns = vec![Vec::with_capacity(n); samples.dim()];
        for draw in samples.draws() {
            for (col, &v) in columns.iter_mut().zip(draw) {
                col.push(v);
            }
        }
        // Smallest satisfied-count whose fraction clears beta, under exactly
        // the comparison empirical_prob uses.
        let total = T::of(n as f64);
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if T::of(mid as f64) / total >= beta {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(Self {
            columns,
            threshold: constraint.threshold(),
            max_violations: n - lo,
        })
    }

    /// Whether `empirical_prob(x) >= beta` for the captured sample set.
    pub fn contains(&self, x: &[T]) -> bool {
        debug_assert_eq!(x.len(), self.columns.len());
        let n = self.columns[0].len();
        let mut violations = 0usize;
        const CHUNK: usize = 512;
        let mut start = 0;
        while start < n {
            let end = (start + CHUNK).min(n);
            match x {
                // The demos are 2-D; keep that inner loop branch-free.
                [x0, x1] => {
                    let (c0, c1) = (&self.columns[0], &self.columns[1]);
                    for i in start..end {
                        let proj = c0[i] * *x0 + c1[i] * *x1;
                        violations += usize::from(proj - self.threshold > T::zero());
                    }
                }
                _ => {
                    for i in start..end {
                        let proj: T = self
                            .columns
                            .iter()
                            .zip(x)
                            .map(|(col, &xi)| col[i] * xi)
                            .sum();
                        violations += usize::from(proj - self.threshold > T::zero());
                    }
                }
            }
            if violations > self.max_violations {
                return false;
            }
            start = end;
        }
        violations <= self.max_violations
    }
}

/// Rasterized membership of `{x : prob(x) >= beta}` over a 2-D box.
///
/// Cells are classified at their centers only; the convexity probe never
/// consumes a raster, so grid artifacts stay out of the convexity verdicts.
#[derive(Debug, Clone)]
pub struct RegionGrid<T> {
    x_bounds: (T, T),
    y_bounds: (T, T),
    resolution: usize,
    beta: T,
    membership: Vec<bool>, // row-major, index = iy * resolution + ix
}

impl<T: Real> RegionGrid<T> {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn x_bounds(&self) -> (T, T) {
        self.x_bounds
    }

    pub fn y_bounds(&self) -> (T, T) {
        self.y_bounds
    }

    pub fn is_member(&self, ix: usize, iy: usize) -> bool {
        self.membership[iy * self.resolution + ix]
    }

    pub fn member_count(&self) -> usize {
        self.membership.iter().filter(|&&m| m).count()
    }

    /// Center of cell `(ix, iy)`.
    pub fn cell_center(&self, ix: usize, iy: usize) -> [T; 2] {
        [
            cell_coord(self.x_bounds, self.resolution, ix),
            cell_coord(self.y_bounds, self.resolution, iy),
        ]
    }

    /// CSV with header `x,y,member`, one row per cell, member as 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.membership.len() * 16);
        out.push_str("x,y,member\n");
        for iy in 0..self.resolution {
            for ix in 0..self.resolution {
                let [x, y] = self.cell_center(ix, iy);
                out.push_str(&format!(
                    "{},{},{}\n",
                    x,
                    y,
                    u8::from(self.is_member(ix, iy))
                ));
            }
        }
        out
    }
}

fn cell_coord<T: Real>(bounds: (T, T), resolution: usize, index: usize) -> T {
    let width = (bounds.1 - bounds.0) / T::of(resolution as f64);
    bounds.0 + (T::of(index as f64) + T::of(0.5)) * width
}

/// Classify every cell center of the box against `prob_fn(x) >= beta`.
///
/// Membership at exactly `beta` counts as feasible.
pub fn region_grid<T, F>(
    prob_fn: F,
    beta: T,
    bounds: [(T, T); 2],
    resolution: usize,
) -> Result<RegionGrid<T>, ChanceError>
where
    T: Real,
    F: Fn(&[T]) -> T,
{
    if resolution < 2 {
        return Err(ChanceError::TooSmall {
            what: "resolution",
            min: 2,
            got: resolution,
        });
    }
    if !(beta > T::zero() && beta < T::one()) {
        return Err(ChanceError::BetaOutOfRange {
            value: beta.as_f64(),
        });
    }
    for (lo, hi) in bounds {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(ChanceError::EmptyBox {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
    }
    let mut membership = Vec::with_capacity(resolution * resolution);
    for iy in 0..resolution {
        let y = cell_coord(bounds[1], resolution, iy);
        for ix in 0..resolution {
            let x = cell_coord(bounds[0], resolution, ix);
            membership.push(prob_fn(&[x, y]) >= beta);
        }
    }
    Ok(RegionGrid {
        x_bounds: bounds[0],
        y_bounds: bounds[1],
        resolution,
        beta,
        membership,
    })
}

/// A midpoint counterexample: both endpoints feasible, midpoint not.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityViolation<T> {
    pub point_a: Vec<T>,
    pub point_b: Vec<T>,
    pub midpoint: Vec<T>,
}

/// Result of a randomized midpoint convexity probe.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport<T> {
    pub trials: usize,
    pub violation_count: usize,
    pub violations: Vec<ConvexityViolation<T>>,
}

impl<T: Real + Serialize> ConvexityReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Sample endpoint pairs uniformly in the box; whenever both are feasible,
/// test the midpoint. Every violation is recorded. A convex membership set
/// can never produce a violation (the probe evaluates the exact membership
/// function, so there is no rasterization to blame).
pub fn convexity_probe<T, F>(
    membership_fn: F,
    bounds: &[(T, T)],
    trials: usize,
    rng: &mut RngHandle,
) -> Result<ConvexityReport<T>, ChanceError>
where
    T: Real,
    F: Fn(&[T]) -> bool,
{
    if trials == 0 {
        return Err(ChanceError::TooSmall {
            what: "trials",
            min: 1,
            got: 0,
        });
    }
    if bounds.is_empty() {
        return Err(ChanceError::Stats(StatsError::EmptyDimension));
    }
    for &(lo, hi) in bounds {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(ChanceError::EmptyBox {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
    }
    let dim = bounds.len();
    let mut violations = Vec::new();
    let mut a = vec![T::zero(); dim];
    let mut b = vec![T::zero(); dim];
    for _ in 0..trials {
        for (v, &(lo, hi)) in a.iter_mut().zip(bounds) {
            *v = lo + T::of(rng.next_f64()) * (hi - lo);
        }
        for (v, &(lo, hi)) in b.iter_mut().zip(bounds) {
            *v = lo + T::of(rng.next_f64()) * (hi - lo);
        }
        if !membership_fn(&a) || !membership_fn(&b) {
            continue;
        }
        let midpoint: Vec<T> = a
            .iter()
            .zip(&b)
            .map(|(&p, &q)| (p + q) / T::of(2.0))
            .collect();
        if !membership_fn(&midpoint) {
            violations.push(ConvexityViolation {
                point_a: a.clone(),
                point_b: b.clone(),
                midpoint,
            });
        }
    }
    Ok(ConvexityReport {
        trials,
        violation_count: violations.len(),
        violations,
    })
}

/// One layer of a region overlay figure.
pub struct RegionLayer<'a, T> {
    pub grid: &'a RegionGrid<T>,
    pub label: &'a str,
    /// CSS fill color.
    pub color: &'a str,
    pub opacity: f64,
}

/// Render stacked region layers as an SVG figure.
///
/// Feasible cells are drawn as filled rectangles (consecutive cells in a row
/// are merged into a single rectangle to keep the file small); layers are
/// distinguished by fill color and opacity, with a legend in the top-right
/// corner. All layers are assumed to share the plot window of the first.
pub fn region_overlay_svg<T: Real>(layers: &[RegionLayer<'_, T>], title: &str) -> String {
    const PLOT: f64 = 540.0;
    const MARGIN: f64 = 45.0;
    let size = PLOT + 2.0 * MARGIN;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{size}\" height=\"{size}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{title}</text>\n",
        size / 2.0,
        MARGIN - 18.0
    ));

    for layer in layers {
        let grid = layer.grid;
        let res = grid.resolution();
        let cell_w = PLOT / res as f64;
        svg.push_str(&format!(
            "  <g fill=\"{}\" fill-opacity=\"{}\" data-label=\"{}\">\n",
            layer.color, layer.opacity, layer.label
        ));
        for iy in 0..res {
            let mut ix = 0;
            while ix < res {
                if !grid.is_member(ix, iy) {
                    ix += 1;
                    continue;
                }
                let run_start = ix;
                while ix < res && grid.is_member(ix, iy) {
                    ix += 1;
                }
                let x = MARGIN + run_start as f64 * cell_w;
                // SVG y runs downward; grid row 0 is the bottom of the box.
                let y = MARGIN + PLOT - (iy + 1) as f64 * cell_w;
                let w = (ix - run_start) as f64 * cell_w;
                svg.push_str(&format!(
                    "    <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{cell_w:.2}\"/>\n"
                ));
            }
        }
        svg.push_str("  </g>\n");
    }

    // Frame and axis extent labels from the first layer.
    if let Some(first) = layers.first() {
        let (x_lo, x_hi) = (
            first.grid.x_bounds().0.as_f64(),
            first.grid.x_bounds().1.as_f64(),
        );
        let (y_lo, y_hi) = (
            first.grid.y_bounds().0.as_f64(),
            first.grid.y_bounds().1.as_f64(),
        );
        svg.push_str(&format!(
            "  <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{PLOT}\" height=\"{PLOT}\" \
             fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n"
        ));
        let labels = [
            (MARGIN, size - MARGIN + 16.0, format!("{x_lo}")),
            (MARGIN + PLOT, size - MARGIN + 16.0, format!("{x_hi}")),
            (MARGIN - 8.0, MARGIN + PLOT, format!("{y_lo}")),
            (MARGIN - 8.0, MARGIN + 10.0, format!("{y_hi}")),
        ];
        for (x, y, text) in labels {
            svg.push_str(&format!(
                "  <text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" \
                 text-anchor=\"middle\">{text}</text>\n"
            ));
        }
    }
    for (k, layer) in layers.iter().enumerate() {
        let y = MARGIN + 16.0 + 18.0 * k as f64;
        let x = MARGIN + PLOT - 150.0;
        svg.push_str(&format!(
            "  <rect x=\"{x}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\" \
             fill-opacity=\"{}\"/>\n",
            y - 10.0,
            layer.color,
            layer.opacity
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            x + 18.0,
            layer.label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
