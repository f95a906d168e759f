//! Average-constraint counterexample.
//!
//! Scalar decision problem: pick the smallest `c` with `ξ - c <= 0` for a
//! standard normal forecast `ξ`. Requiring the constraint only on average
//! gives `c = E[ξ] = 0`, which is then violated half the time; requiring it
//! with confidence `β` gives the β-quantile instead.

use serde::Serialize;

use crate::stats::{std_normal_cdf, std_normal_quantile};

use super::ExperimentError;

#[derive(Debug, Clone, Serialize)]
pub struct AvgConstraintDemo {
    pub beta: f64,
    /// Average-constraint decision: the forecast mean.
    pub c_avg_constraint: f64,
    /// Probability the average-constraint decision is violated.
    pub violation_probability: f64,
    /// Chance-constraint decision at confidence `beta`.
    pub c_chance_constraint: f64,
}

impl AvgConstraintDemo {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("demo serializes")
    }
}

pub fn run_average_constraint_demo(beta: f64) -> Result<AvgConstraintDemo, ExperimentError> {
    let c_avg = 0.0;
    let violation_probability = 1.0 - std_normal_cdf(c_avg)?;
    let c_chance_constraint = std_normal_quantile(beta)?;
    Ok(AvgConstraintDemo {
        beta,
        c_avg_constraint: c_avg,
        violation_probability,
        c_chance_constraint,
    })
}
