//! Staffing sweeps over growing sample sizes.
//!
//! Three studies share the same scaffolding (simulate data at the true rates,
//! solve, score, aggregate over replications):
//!
//! - the violation sweep compares how often each solver's pick violates the
//!   true requirements;
//! - the consistency sweep tracks how often the chance-constrained pick hits
//!   the true optimum as data grows;
//! - the qualification-decay sweep watches the posterior confidence assigned
//!   to a server count that is truly infeasible.

use rayon::prelude::*;

use crate::queueing::{
    min_feasible_servers, posterior_constraint_prob, qos_violated, simulate_queue_data,
    staff_avg_constraint, staff_bayes_cc, staff_mle, QueueError, StaffingProblem,
    DEFAULT_C_MAX, DEFAULT_MC_DRAWS,
};
use crate::rng::RngHandle;
use crate::variational::gamma_posterior_update;

use super::{replication_seed, ExperimentConfig, ExperimentError, SweepResult, SweepRow};

/// Baseline MLE violation fractions for the default instance
/// (λ0 = 16, μ0 = 4, α = 0.37), emitted alongside harness output for
/// side-by-side comparison. The measurement procedure behind these reference
/// numbers is not fully specified, so they are reported, never asserted.
pub const MLE_VIOLATION_BASELINE: [(usize, f64); 8] = [
    (50, 0.52),
    (100, 0.56),
    (150, 0.57),
    (200, 0.57),
    (250, 0.61),
    (300, 0.62),
    (350, 0.58),
    (400, 0.56),
];

/// Per-replication outcome of the violation sweep.
struct ViolationOutcome {
    mle: bool,
    bayes_cc: bool,
    avg: bool,
}

/// For each `n` and replication: simulate, run all three solvers, and score
/// each pick against the true parameters. An infeasible solve counts as a
/// violation (dropping it would bias the fractions downward). Emits rows
/// `phi_mle`, `phi_bayes_cc`, `phi_avg_constraint`, plus `phi_mle_baseline`
/// where reference values exist.
pub fn run_violation_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        let outcomes: Vec<ViolationOutcome> = (0..config.replications)
            .into_par_iter()
            .map(|rep| violation_replication(config, n, rep))
            .collect::<Result<_, _>>()?;
        let frac = |f: &dyn Fn(&ViolationOutcome) -> bool| {
            outcomes.iter().filter(|o| f(o)).count() as f64 / outcomes.len() as f64
        };
        rows.push(SweepRow {
            n,
            statistic: "phi_mle".into(),
            value: frac(&|o| o.mle),
        });
        rows.push(SweepRow {
            n,
            statistic: "phi_bayes_cc".into(),
            value: frac(&|o| o.bayes_cc),
        });
        rows.push(SweepRow {
            n,
            statistic: "phi_avg_constraint".into(),
            value: frac(&|o| o.avg),
        });
        if let Some(&(_, baseline)) = MLE_VIOLATION_BASELINE.iter().find(|(bn, _)| *bn == n) {
            rows.push(SweepRow {
                n,
                statistic: "phi_mle_baseline".into(),
                value: baseline,
            });
        }
    }
    Ok(SweepResult::new("table1", config, rows))
}

fn violation_replication(
    config: &ExperimentConfig,
    n: usize,
    rep: usize,
) -> Result<ViolationOutcome, ExperimentError> {
    let mut rng = RngHandle::new(replication_seed(config.seed, rep, n));
    let data = simulate_queue_data(config.lambda0, config.mu0, n, &mut rng)?;
    let problem = StaffingProblem::new(config.alpha, config.beta)?;

    let mle_c = feasible_or_none(staff_mle(&data, config.alpha, problem.c_max))?;
    let bayes_c =
        feasible_or_none(staff_bayes_cc(&data, &problem, DEFAULT_MC_DRAWS, &mut rng))?;
    let avg_c =
        feasible_or_none(staff_avg_constraint(&data, &problem, DEFAULT_MC_DRAWS, &mut rng))?;

    let violated = |c: Option<u32>| {
        c.is_none_or(|c| qos_violated(c, config.lambda0, config.mu0, config.alpha))
    };
    Ok(ViolationOutcome {
        mle: violated(mle_c),
        bayes_cc: violated(bayes_c),
        avg: violated(avg_c),
    })
}

/// Infeasibility is an expected outcome for a replication, not an abort.
fn feasible_or_none(
    result: Result<crate::queueing::StaffingResult<f64>, QueueError>,
) -> Result<Option<u32>, ExperimentError> {
    match result {
        Ok(r) => Ok(Some(r.c)),
        Err(QueueError::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Fraction of replications where the chance-constrained pick equals the true
/// optimum, and the mean absolute deviation from it, per `n`.
///
/// Emits rows `fraction_optimal` and `mean_abs_dev`; the true optimum is the
/// smallest feasible server count at the true rates.
pub fn run_consistency_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let c_star = min_feasible_servers(config.lambda0, config.mu0, config.alpha, DEFAULT_C_MAX)
        .ok_or_else(|| {
            ExperimentError::InvalidConfig(format!(
                "no feasible server count at the true rates ({}, {})",
                config.lambda0, config.mu0
            ))
        })?;
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        let picks: Vec<u32> = (0..config.replications)
            .into_par_iter()
            .map(|rep| -> Result<u32, ExperimentError> {
                let mut rng = RngHandle::new(replication_seed(config.seed, rep, n));
                let data = simulate_queue_data(config.lambda0, config.mu0, n, &mut rng)?;
                let problem = StaffingProblem::new(config.alpha, config.beta)?;
                Ok(staff_bayes_cc(&data, &problem, DEFAULT_MC_DRAWS, &mut rng)?.c)
            })
            .collect::<Result<_, _>>()?;
        let hits = picks.iter().filter(|&&c| c == c_star).count();
        let mean_dev = picks
            .iter()
            .map(|&c| (f64::from(c) - f64::from(c_star)).abs())
            .sum::<f64>()
            / picks.len() as f64;
        rows.push(SweepRow {
            n,
            statistic: "fraction_optimal".into(),
            value: hits as f64 / picks.len() as f64,
        });
        rows.push(SweepRow {
            n,
            statistic: "mean_abs_dev".into(),
            value: mean_dev,
        });
    }
    let mut result = SweepResult::new("consistency", config, rows);
    result.rows.push(SweepRow {
        n: 0,
        statistic: "c_star".into(),
        value: f64::from(c_star),
    });
    Ok(result)
}

/// How often the posterior assigns at least confidence `β` to a server count
/// that is truly infeasible, per `n`.
///
/// Emits rows `qualification_fraction` and `mean_constraint_prob`. The
/// candidate must actually violate the requirements at the true rates;
/// anything else is a configuration error.
pub fn run_qualification_decay(
    config: &ExperimentConfig,
    c_infeasible: u32,
) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    if c_infeasible == 0 {
        return Err(ExperimentError::InvalidConfig(
            "c_infeasible must be at least 1".into(),
        ));
    }
    if !qos_violated(c_infeasible, config.lambda0, config.mu0, config.alpha) {
        return Err(ExperimentError::InvalidConfig(format!(
            "c = {c_infeasible} is feasible at the true rates; decay needs an infeasible candidate"
        )));
    }
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        let probs: Vec<f64> = (0..config.replications)
            .into_par_iter()
            .map(|rep| -> Result<f64, ExperimentError> {
                let mut rng = RngHandle::new(replication_seed(config.seed, rep, n));
                let data = simulate_queue_data(config.lambda0, config.mu0, n, &mut rng)?;
                let problem = StaffingProblem::new(config.alpha, config.beta)?;
                let lambda_post = gamma_posterior_update(
                    &problem.lambda_prior,
                    data.len() as u64,
                    data.interarrival_sum(),
                )?;
                let mu_post = gamma_posterior_update(
                    &problem.mu_prior,
                    data.len() as u64,
                    data.service_sum(),
                )?;
                Ok(posterior_constraint_prob(
                    c_infeasible,
                    &lambda_post,
                    &mu_post,
                    config.alpha,
                    DEFAULT_MC_DRAWS,
                    &mut rng,
                )?)
            })
            .collect::<Result<_, _>>()?;
        let qualified = probs.iter().filter(|&&p| p >= config.beta).count();
        rows.push(SweepRow {
            n,
            statistic: "qualification_fraction".into(),
            value: qualified as f64 / probs.len() as f64,
        });
        rows.push(SweepRow {
            n,
            statistic: "mean_constraint_prob".into(),
            value: probs.iter().sum::<f64>() / probs.len() as f64,
        });
    }
    Ok(SweepResult::new("decay", config, rows))
}

/// Least-squares slope of `values` against `ln n`.
pub fn slope_against_log_n(points: &[(usize, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(k, _)| (*k as f64).ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, v)| v).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, (_, y)) in xs.iter().zip(points) {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}
