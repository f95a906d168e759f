//! Seed-deterministic experiment harnesses.
//!
//! Each runner is a pure function of its configuration: replication seeds are
//! derived arithmetically from the base seed, replications execute in
//! parallel, and result rows are sorted before emission, so rerunning a
//! configuration reproduces every output file byte for byte.
//!
//! Outputs land under `<output_dir>/<experiment>/`: a `summary.json` echoing
//! the full configuration, a `curves.csv` of `(n, statistic, value)` rows,
//! and SVG overlays for the region comparison.

mod ac;
mod regions;
mod sweeps;

pub use ac::{run_average_constraint_demo, AvgConstraintDemo};
pub use regions::{run_region_comparison, RegionComparisonConfig, RegionPanel};
pub use sweeps::{
    run_consistency_sweep, run_qualification_decay, run_violation_sweep, slope_against_log_n,
    MLE_VIOLATION_BASELINE,
};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chance::ChanceError;
use crate::queueing::QueueError;
use crate::sampling::SamplingError;
use crate::stats::StatsError;
use crate::variational::VariationalError;

/// Configuration shared by the staffing sweeps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub replications: usize,
    pub n_grid: Vec<usize>,
    /// Maximum tolerated delayed fraction.
    pub alpha: f64,
    /// Confidence level for the chance-constrained solver.
    pub beta: f64,
    /// True arrival rate used to simulate data and to score violations.
    pub lambda0: f64,
    /// True service rate.
    pub mu0: f64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Violation-fraction sweep defaults: n = 50..400 step 50,
    /// 100 replications.
    pub fn violation_sweep_defaults() -> Self {
        Self {
            seed: 0,
            replications: 100,
            n_grid: (1..=8).map(|k| 50 * k).collect(),
            alpha: 0.37,
            beta: 0.95,
            lambda0: 16.0,
            mu0: 4.0,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Consistency-study defaults: two decades of n, 50 replications.
    pub fn consistency_defaults() -> Self {
        Self {
            replications: 50,
            n_grid: vec![50, 200, 800, 3200, 12800],
            ..Self::violation_sweep_defaults()
        }
    }

    /// Qualification-decay defaults: β = 0.9, n up to 3200.
    pub fn decay_defaults() -> Self {
        Self {
            replications: 100,
            n_grid: vec![50, 200, 800, 3200],
            beta: 0.9,
            ..Self::violation_sweep_defaults()
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.replications == 0 {
            return Err(ExperimentError::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.n_grid.is_empty() {
            return Err(ExperimentError::InvalidConfig("n_grid must be non-empty".into()));
        }
        if self.n_grid[0] == 0 {
            return Err(ExperimentError::InvalidConfig("n must be at least 1".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::InvalidConfig(
                "n_grid must be strictly increasing".into(),
            ));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ExperimentError::InvalidConfig(format!(
                    "{name} must lie strictly inside (0, 1), got {v}"
                )));
            }
        }
        for (name, v) in [("lambda0", self.lambda0), ("mu0", self.mu0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ExperimentError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Replication seeds: `seed + 1000003·replication + n`. Distinct cells never
/// share a stream and the derivation is independent of execution order.
pub fn replication_seed(base: u64, replication: usize, n: usize) -> u64 {
    base.wrapping_add(1_000_003u64.wrapping_mul(replication as u64))
        .wrapping_add(n as u64)
}

/// One `(n, statistic, value)` record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub statistic: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub experiment: String,
    pub version: String,
    pub config: ExperimentConfig,
}

/// Rows plus the configuration echo, ready for serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn new(experiment: &str, config: &ExperimentConfig, rows: Vec<SweepRow>) -> Self {
        Self {
            metadata: SweepMetadata {
                experiment: experiment.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: config.clone(),
            },
            rows,
        }
    }

    /// Look up a statistic at a given `n`.
    pub fn value(&self, n: usize, statistic: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.statistic == statistic)
            .map(|r| r.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes")
    }

    /// CSV with header `n,statistic,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,statistic,value\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.n, row.statistic, row.value));
        }
        out
    }

    /// Write `summary.json` and `curves.csv` under
    /// `<output_dir>/<experiment>/`.
    pub fn write_outputs(&self) -> Result<(), ExperimentError> {
        let dir = self
            .metadata
            .config
            .output_dir
            .join(&self.metadata.experiment);
        write_text(&dir.join("summary.json"), &self.to_json())?;
        write_text(&dir.join("curves.csv"), &self.to_csv())
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Queue(#[from] QueueError),
    #[error(transparent)]
    Chance(#[from] ChanceError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

/// Create parent directories and write a text file, carrying path context on
/// failure.
pub(crate) fn write_text(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| ExperimentError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}
