//! `ccvb`: simulate queue observations, solve staffing problems, and run the
//! seed-deterministic study harnesses.
//!
//! Exit codes: 0 success, 2 usage/configuration error, 1 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use ccvb_core::experiments::{
    run_average_constraint_demo, run_consistency_sweep, run_qualification_decay,
    run_region_comparison, run_violation_sweep, ExperimentConfig, ExperimentError,
    RegionComparisonConfig,
};
use ccvb_core::queueing::{
    simulate_queue_data, staff_avg_constraint, staff_bayes_cc, staff_mle, QueueDataset,
    StaffingProblem,
};
use ccvb_core::{Gamma, RngHandle};

#[derive(Parser)]
#[command(
    name = "ccvb",
    version,
    about = "Bayesian chance-constrained design: queueing data, staffing solvers, \
             and feasibility-region studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate single-server FCFS observations; writes <out>/dataset.csv
    Simulate(SimulateArgs),
    /// Solve the staffing problem from a dataset CSV (JSON on stdout)
    Staff(StaffArgs),
    /// Feasibility regions: analytic vs Monte Carlo vs mean-field (SVG/CSV)
    Regions(RegionsArgs),
    /// Violation-fraction sweep over growing sample sizes
    Table1(SweepArgs),
    /// How often the chance-constrained pick hits the true optimum
    Consistency(SweepArgs),
    /// Posterior qualification decay for a truly infeasible server count
    Decay(DecayArgs),
    /// Average-constraint counterexample (JSON on stdout)
    AcDemo(AcDemoArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Arrival rate
    #[arg(long, default_value_t = 16.0)]
    lambda: f64,
    /// Service rate
    #[arg(long, default_value_t = 4.0)]
    mu: f64,
    /// Number of customers
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mle,
    AvgConstraint,
    BayesCc,
}

#[derive(Args)]
struct StaffArgs {
    /// Dataset CSV with header T,S,E
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::BayesCc)]
    method: MethodArg,
    /// Maximum tolerated delayed fraction
    #[arg(long, default_value_t = 0.37)]
    alpha: f64,
    /// Confidence level for the chance constraint
    #[arg(long, default_value_t = 0.95)]
    beta: f64,
    /// Upper bound of the server scan
    #[arg(long, default_value_t = 50)]
    c_max: u32,
    /// Posterior Monte Carlo draws
    #[arg(long, default_value_t = 20_000)]
    mc_draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    lambda_prior_shape: f64,
    #[arg(long, default_value_t = 0.01)]
    lambda_prior_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    mu_prior_shape: f64,
    #[arg(long, default_value_t = 0.01)]
    mu_prior_rate: f64,
}

#[derive(Args)]
struct RegionsArgs {
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    /// Chain steps, including burn-in
    #[arg(long, default_value_t = 8000)]
    steps: usize,
    #[arg(long, default_value_t = 3000)]
    burn_in: usize,
    #[arg(long, default_value_t = 1.0)]
    proposal_std: f64,
    /// Plot window half-width: the box is [-w, w]^2
    #[arg(long, default_value_t = 3.0)]
    half_width: f64,
    /// Grid cells per axis
    #[arg(long, default_value_t = 301)]
    resolution: usize,
    /// Convexity-probe trials for the closed-form regions
    #[arg(long, default_value_t = 100_000)]
    probe_trials: usize,
    /// Convexity-probe trials for the empirical region
    #[arg(long, default_value_t = 1_000_000)]
    mc_probe_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config file (flags override its values)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Comma-separated sample sizes, strictly increasing
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecayArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Server count that must violate the requirements at the true rates
    #[arg(long, default_value_t = 5)]
    c_infeasible: u32,
}

#[derive(Args)]
struct AcDemoArgs {
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
}

/// Config-file mirror of `ExperimentConfig`: every field optional so files
/// can override only what they care about.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    seed: Option<u64>,
    replications: Option<usize>,
    n_grid: Option<Vec<usize>>,
    alpha: Option<f64>,
    beta: Option<f64>,
    lambda0: Option<f64>,
    mu0: Option<f64>,
    output_dir: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<ccvb_core::queueing::QueueError> for CliError {
    fn from(e: ccvb_core::queueing::QueueError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<ccvb_core::stats::StatsError> for CliError {
    fn from(e: ccvb_core::stats::StatsError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Staff(args) => staff(args),
        Command::Regions(args) => regions(args),
        Command::Table1(args) => {
            let config = resolve_config(&args, ExperimentConfig::violation_sweep_defaults())?;
            let result = run_violation_sweep(&config)?;
            result.write_outputs()?;
            eprintln!(
                "wrote {}",
                config.output_dir.join("table1").join("summary.json").display()
            );
            Ok(())
        }
        Command::Consistency(args) => {
            let config = resolve_config(&args, ExperimentConfig::consistency_defaults())?;
            let result = run_consistency_sweep(&config)?;
            result.write_outputs()?;
            eprintln!(
                "wrote {}",
                config
                    .output_dir
                    .join("consistency")
                    .join("summary.json")
                    .display()
            );
            Ok(())
        }
        Command::Decay(args) => {
            let config = resolve_config(&args.sweep, ExperimentConfig::decay_defaults())?;
            let result = run_qualification_decay(&config, args.c_infeasible)?;
            result.write_outputs()?;
            eprintln!(
                "wrote {}",
                config.output_dir.join("decay").join("summary.json").display()
            );
            Ok(())
        }
        Command::AcDemo(args) => {
            let demo = run_average_constraint_demo(args.beta)?;
            println!("{}", demo.to_json());
            Ok(())
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut rng = RngHandle::new(args.seed);
    let data = simulate_queue_data(args.lambda, args.mu, args.n, &mut rng)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", args.out.display())))?;
    let path = args.out.join("dataset.csv");
    std::fs::write(&path, data.to_csv())
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
    eprintln!("wrote {} ({} rows)", path.display(), data.len());
    Ok(())
}

fn staff(args: StaffArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.data)
        .map_err(|e| CliError::Runtime(format!("reading {}: {e}", args.data.display())))?;
    let data = QueueDataset::from_csv_str(&text)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.data.display())))?;
    let lambda_prior = Gamma::new(args.lambda_prior_shape, args.lambda_prior_rate)?;
    let mu_prior = Gamma::new(args.mu_prior_shape, args.mu_prior_rate)?;
    let problem =
        StaffingProblem::with_priors(args.alpha, args.beta, args.c_max, lambda_prior, mu_prior)?;
    let mut rng = RngHandle::new(args.seed);
    let result = match args.method {
        MethodArg::Mle => staff_mle(&data, args.alpha, args.c_max)?,
        MethodArg::AvgConstraint => {
            staff_avg_constraint(&data, &problem, args.mc_draws, &mut rng)?
        }
        MethodArg::BayesCc => staff_bayes_cc(&data, &problem, args.mc_draws, &mut rng)?,
    };
    println!("{}", result.to_json());
    Ok(())
}

fn regions(args: RegionsArgs) -> Result<(), CliError> {
    let config = RegionComparisonConfig {
        beta: args.beta,
        steps: args.steps,
        burn_in: args.burn_in,
        proposal_std: args.proposal_std,
        seed: args.seed,
        half_width: args.half_width,
        resolution: args.resolution,
        probe_trials: args.probe_trials,
        mc_probe_trials: args.mc_probe_trials,
        output_dir: args.out.clone(),
    };
    run_region_comparison(&config)?;
    eprintln!("wrote {}", args.out.join("regions").display());
    Ok(())
}

/// Precedence: built-in defaults, then the config file, then explicit flags.
fn resolve_config(
    args: &SweepArgs,
    defaults: ExperimentConfig,
) -> Result<ExperimentConfig, CliError> {
    let mut config = defaults;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("reading config {}: {e}", path.display())))?;
        let partial: PartialConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        if let Some(v) = partial.seed {
            config.seed = v;
        }
        if let Some(v) = partial.replications {
            config.replications = v;
        }
        if let Some(v) = partial.n_grid {
            config.n_grid = v;
        }
        if let Some(v) = partial.alpha {
            config.alpha = v;
        }
        if let Some(v) = partial.beta {
            config.beta = v;
        }
        if let Some(v) = partial.lambda0 {
            config.lambda0 = v;
        }
        if let Some(v) = partial.mu0 {
            config.mu0 = v;
        }
        if let Some(v) = partial.output_dir {
            config.output_dir = v;
        }
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.replications {
        config.replications = v;
    }
    if let Some(v) = &args.n_grid {
        config.n_grid = v.clone();
    }
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.beta {
        config.beta = v;
    }
    if let Some(v) = args.lambda0 {
        config.lambda0 = v;
    }
    if let Some(v) = args.mu0 {
        config.mu0 = v;
    }
    if let Some(v) = &args.out {
        config.output_dir = v.clone();
    }
    config.validate().map_err(CliError::from)?;
    Ok(config)
}
