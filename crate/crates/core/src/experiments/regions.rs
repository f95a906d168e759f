//! Feasibility-region comparison: analytic truth vs. Monte Carlo empirical
//! vs. mean-field approximation.
//!
//! For four correlated 2-D Gaussians (σ₁₂ ∈ {-0.1, -0.025, 0.025, 0.1}) this
//! runner rasterizes the three `{x : P[ξᵀx - 1 ≤ 0] ≥ β}` regions, probes
//! each exact membership function for midpoint convexity violations, and
//! writes one SVG overlay plus three membership CSVs per panel. The analytic
//! and mean-field regions are second-order-cone sets and never produce a
//! violation; the empirical region routinely does.

use rayon::prelude::*;
use serde::Serialize;

use std::path::PathBuf;

use crate::chance::{
    analytic_linear_prob, convexity_probe, empirical_prob, region_grid, region_overlay_svg,
    vb_linear_prob, ConvexityReport, EmpiricalMembership, LinearChanceConstraint, RegionGrid,
    RegionLayer,
};
use crate::rng::RngHandle;
use crate::sampling::{metropolis_hastings, MhConfig};
use crate::stats::MultivariateGaussian;
use crate::variational::mean_field_gaussian;

use super::{write_text, ExperimentError};

/// The four demo covariances: unit variances, varying correlation.
pub const DEMO_SIGMA12: [f64; 4] = [-0.1, -0.025, 0.025, 0.1];

#[derive(Debug, Clone, Serialize)]
pub struct RegionComparisonConfig {
    pub beta: f64,
    /// Total chain steps, including burn-in.
    pub steps: usize,
    pub burn_in: usize,
    pub proposal_std: f64,
    pub seed: u64,
    /// Plot window is the square `[-half_width, half_width]²`.
    pub half_width: f64,
    /// Cells per axis.
    pub resolution: usize,
    /// Midpoint trials probing the analytic and mean-field regions.
    pub probe_trials: usize,
    /// Midpoint trials probing the empirical region. Its non-convexities are
    /// shallow boundary dents, so the detector needs far more trials than the
    /// closed-form regions (which are convex and cheap to evaluate anyway).
    pub mc_probe_trials: usize,
    pub output_dir: PathBuf,
}

impl Default for RegionComparisonConfig {
    fn default() -> Self {
        Self {
            beta: 0.9,
            steps: 8000,
            burn_in: 3000,
            proposal_std: 1.0,
            seed: 0,
            half_width: 3.0,
            resolution: 301,
            probe_trials: 100_000,
            mc_probe_trials: 1_000_000,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Everything computed for one covariance panel.
#[derive(Debug, Clone)]
pub struct RegionPanel {
    pub sigma12: f64,
    pub acceptance_rate: f64,
    pub true_grid: RegionGrid<f64>,
    pub mc_grid: RegionGrid<f64>,
    pub vb_grid: RegionGrid<f64>,
    pub true_probe: ConvexityReport<f64>,
    pub mc_probe: ConvexityReport<f64>,
    pub vb_probe: ConvexityReport<f64>,
}

#[derive(Serialize)]
struct PanelSummary<'a> {
    sigma12: f64,
    acceptance_rate: f64,
    retained_draws: usize,
    feasible_cells_true: usize,
    feasible_cells_mc: usize,
    feasible_cells_vb: usize,
    convexity_true: &'a ConvexityReport<f64>,
    convexity_mc: &'a ConvexityReport<f64>,
    convexity_vb: &'a ConvexityReport<f64>,
}

#[derive(Serialize)]
struct RegionsSummary<'a> {
    config: &'a RegionComparisonConfig,
    version: &'a str,
    panels: Vec<PanelSummary<'a>>,
}

/// Compute one panel without touching the filesystem.
pub fn region_panel(
    config: &RegionComparisonConfig,
    sigma12: f64,
    panel_index: u64,
) -> Result<RegionPanel, ExperimentError> {
    let target = MultivariateGaussian::new(
        vec![0.0, 0.0],
        vec![vec![1.0, sigma12], vec![sigma12, 1.0]],
    )?;
    let constraint = LinearChanceConstraint::demo_2d();
    let bounds = [
        (-config.half_width, config.half_width),
        (-config.half_width, config.half_width),
    ];

    let mh = MhConfig {
        steps: config.steps,
        burn_in: config.burn_in,
        proposal_std: config.proposal_std,
        init: vec![0.0, 0.0],
        seed: config.seed.wrapping_add(panel_index),
    };
    let samples = metropolis_hastings(
        |x: &[f64]| target.log_pdf(x).expect("dimension fixed at 2"),
        &mh,
    )?;
    let q = mean_field_gaussian(&target);

    let true_prob = |x: &[f64]| analytic_linear_prob(x, &target, &constraint).unwrap();
    let mc_prob = |x: &[f64]| empirical_prob(x, &samples, &constraint).unwrap();
    let vb_prob = |x: &[f64]| vb_linear_prob(x, &q, &constraint).unwrap();

    let true_grid = region_grid(true_prob, config.beta, bounds, config.resolution)?;
    let mc_grid = region_grid(mc_prob, config.beta, bounds, config.resolution)?;
    let vb_grid = region_grid(vb_prob, config.beta, bounds, config.resolution)?;

    // Probes run on the exact membership functions, not the rasters. The
    // empirical membership goes through the count-thresholded fast path,
    // which tests pin to agree with `empirical_prob(x) >= beta` exactly.
    let probe_rng = |salt: u64| RngHandle::derived(config.seed, 1000 + 10 * panel_index + salt);
    let true_probe = convexity_probe(
        |x: &[f64]| true_prob(x) >= config.beta,
        &bounds,
        config.probe_trials,
        &mut probe_rng(0),
    )?;
    let mc_member = EmpiricalMembership::new(&samples, &constraint, config.beta)?;
    let mc_probe = convexity_probe(
        |x: &[f64]| mc_member.contains(x),
        &bounds,
        config.mc_probe_trials,
        &mut probe_rng(1),
    )?;
    let vb_probe = convexity_probe(
        |x: &[f64]| vb_prob(x) >= config.beta,
        &bounds,
        config.probe_trials,
        &mut probe_rng(2),
    )?;

    Ok(RegionPanel {
        sigma12,
        acceptance_rate: samples.acceptance_rate(),
        true_grid,
        mc_grid,
        vb_grid,
        true_probe,
        mc_probe,
        vb_probe,
    })
}

/// Run all four panels (in parallel), write SVG overlays, membership CSVs,
/// and `summary.json` under `<output_dir>/regions/`, and return the panels.
pub fn run_region_comparison(
    config: &RegionComparisonConfig,
) -> Result<Vec<RegionPanel>, ExperimentError> {
    let panels: Vec<RegionPanel> = DEMO_SIGMA12
        .par_iter()
        .enumerate()
        .map(|(idx, &sigma12)| region_panel(config, sigma12, idx as u64))
        .collect::<Result<_, _>>()?;

    let dir = config.output_dir.join("regions");
    for panel in &panels {
        let label = format!("{:.3}", panel.sigma12);
        let svg = region_overlay_svg(
            &[
                RegionLayer {
                    grid: &panel.true_grid,
                    label: "true",
                    color: "#1f77b4",
                    opacity: 0.50,
                },
                RegionLayer {
                    grid: &panel.mc_grid,
                    label: "monte-carlo",
                    color: "#d62728",
                    opacity: 0.40,
                },
                RegionLayer {
                    grid: &panel.vb_grid,
                    label: "mean-field",
                    color: "#2ca02c",
                    opacity: 0.35,
                },
            ],
            &format!("sigma12 = {label}, beta = {}", config.beta),
        );
        write_text(&dir.join(format!("region_sigma12_{label}.svg")), &svg)?;
        for (method, grid) in [
            ("true", &panel.true_grid),
            ("mc", &panel.mc_grid),
            ("vb", &panel.vb_grid),
        ] {
            let path = dir.join(format!("grid_sigma12_{label}_{method}.csv"));
            write_text(&path, &grid.to_csv())?;
        }
    }

    let summary = RegionsSummary {
        config,
        version: env!("CARGO_PKG_VERSION"),
        panels: panels
            .iter()
            .map(|p| PanelSummary {
                sigma12: p.sigma12,
                acceptance_rate: p.acceptance_rate,
                retained_draws: config.steps - config.burn_in,
                feasible_cells_true: p.true_grid.member_count(),
                feasible_cells_mc: p.mc_grid.member_count(),
                feasible_cells_vb: p.vb_grid.member_count(),
                convexity_true: &p.true_probe,
                convexity_mc: &p.mc_probe,
                convexity_vb: &p.vb_probe,
            })
            .collect(),
    };
    write_text(
        &dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(panels)
}
