//! M/M/c staffing: data simulation, the Erlang-C congestion measure, rate
//! estimation, and three staffing solvers.
//!
//! The decision problem: pick the smallest server count `c` such that the
//! queue is stable (`cμ - λ > 0`) and the fraction of customers delayed
//! (`erlang_delay_prob`) stays strictly below a quality-of-service cap `α`.
//! Both inequalities are strict. The solvers differ in how they treat
//! parameter uncertainty:
//!
//! - [`staff_mle`] plugs point estimates into the constraints.
//! - [`staff_avg_constraint`] requires the constraints to hold in expectation
//!   under the Gamma posteriors.
//! - [`staff_bayes_cc`] requires the posterior probability of jointly
//!   satisfying the constraints to reach a confidence level `β`.
//!
//! Observation data comes from a single-server FCFS system; the likelihood
//! only involves interarrival and service durations, so stability of the
//! *observation* queue is irrelevant (the default instance is observed
//! overloaded on purpose).

use serde::Serialize;
use thiserror::Error;

use crate::rng::RngHandle;
use crate::scalar::Real;
use crate::stats::{GammaDist, StatsError};
use crate::variational::{gamma_posterior_update, VariationalError};

/// Default Monte Carlo draw count for posterior constraint probabilities.
pub const DEFAULT_MC_DRAWS: usize = 20_000;
/// Default cap on the server-count scan.
pub const DEFAULT_C_MAX: u32 = 50;

/// Per-customer arrival, service-start, and service-end times.
///
/// Arrival times are nondecreasing with the convention that the first
/// interarrival is measured from time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueDataset<T> {
    arrivals: Vec<T>,
    service_starts: Vec<T>,
    service_ends: Vec<T>,
}

impl<T: Real> QueueDataset<T> {
    pub fn new(
        arrivals: Vec<T>,
        service_starts: Vec<T>,
        service_ends: Vec<T>,
    ) -> Result<Self, QueueError> {
        let n = arrivals.len();
        if n == 0 {
            return Err(QueueError::EmptyDataset);
        }
        if service_starts.len() != n || service_ends.len() != n {
            return Err(QueueError::RaggedColumns {
                arrivals: n,
                starts: service_starts.len(),
                ends: service_ends.len(),
            });
        }
        let mut prev_arrival = T::zero();
        for i in 0..n {
            let (t, s, e) = (arrivals[i], service_starts[i], service_ends[i]);
            if !t.is_finite() || !s.is_finite() || !e.is_finite() {
                return Err(QueueError::InvalidRow {
                    row: i,
                    what: "non-finite time",
                });
            }
            if t < prev_arrival {
                return Err(QueueError::InvalidRow {
                    row: i,
                    what: "arrival earlier than previous arrival",
                });
            }
            if s < t {
                return Err(QueueError::InvalidRow {
                    row: i,
                    what: "service start before arrival",
                });
            }
            if e <= s {
                return Err(QueueError::InvalidRow {
                    row: i,
                    what: "service end before start",
                });
            }
            prev_arrival = t;
        }
        Ok(Self {
            arrivals,
            service_starts,
            service_ends,
        })
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    pub fn arrivals(&self) -> &[T] {
        &self.arrivals
    }

    pub fn service_starts(&self) -> &[T] {
        &self.service_starts
    }

    pub fn service_ends(&self) -> &[T] {
        &self.service_ends
    }

    /// Sum of interarrival gaps (first gap measured from time zero).
    pub fn interarrival_sum(&self) -> T {
        let mut prev = T::zero();
        let mut acc = T::zero();
        for &t in &self.arrivals {
            acc += t - prev;
            prev = t;
        }
        acc
    }

    /// Sum of service durations.
    pub fn service_sum(&self) -> T {
        self.service_starts
            .iter()
            .zip(&self.service_ends)
            .map(|(&s, &e)| e - s)
            .sum()
    }

    /// CSV with header `T,S,E`, one row per customer, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 32 + 8);
        out.push_str("T,S,E\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.arrivals[i], self.service_starts[i], self.service_ends[i]
            ));
        }
        out
    }

    /// Parse the `T,S,E` CSV format, validating all invariants.
    pub fn from_csv_str(text: &str) -> Result<Self, QueueError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(header) if header.trim() == "T,S,E" => {}
            other => {
                return Err(QueueError::BadHeader {
                    got: other.unwrap_or("").trim().to_string(),
                })
            }
        }
        let (mut arrivals, mut starts, mut ends) = (Vec::new(), Vec::new(), Vec::new());
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(QueueError::BadRowSyntax {
                    row: idx,
                    detail: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let mut parsed = [T::zero(); 3];
            for (k, f) in fields.iter().enumerate() {
                parsed[k] = f
                    .trim()
                    .parse::<f64>()
                    .map(T::of)
                    .map_err(|e| QueueError::BadRowSyntax {
                        row: idx,
                        detail: format!("field {}: {e}", ["T", "S", "E"][k]),
                    })?;
            }
            arrivals.push(parsed[0]);
            starts.push(parsed[1]);
            ends.push(parsed[2]);
        }
        Self::new(arrivals, starts, ends)
    }
}

/// Staffing problem parameters.
#[derive(Debug, Clone)]
pub struct StaffingProblem<T> {
    /// Maximum tolerated fraction of customers delayed in queue.
    pub alpha: T,
    /// Confidence level for the chance-constrained solver.
    pub beta: T,
    /// Upper bound of the server-count scan.
    pub c_max: u32,
    pub lambda_prior: GammaDist<T>,
    pub mu_prior: GammaDist<T>,
}

impl<T: Real> StaffingProblem<T> {
    /// Diffuse proper Gamma(1, 0.01) priors on both rates.
    pub fn new(alpha: T, beta: T) -> Result<Self, QueueError> {
        let prior = GammaDist::new(T::one(), T::of(0.01))?;
        Self::with_priors(alpha, beta, DEFAULT_C_MAX, prior, prior)
    }

    pub fn with_priors(
        alpha: T,
        beta: T,
        c_max: u32,
        lambda_prior: GammaDist<T>,
        mu_prior: GammaDist<T>,
    ) -> Result<Self, QueueError> {
        for (what, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > T::zero() && v < T::one()) {
                return Err(QueueError::ProbabilityOutOfRange {
                    what,
                    value: v.as_f64(),
                });
            }
        }
        if c_max == 0 {
            return Err(QueueError::ZeroCMax);
        }
        Ok(Self {
            alpha,
            beta,
            c_max,
            lambda_prior,
            mu_prior,
        })
    }
}

/// Which formulation produced a staffing decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StaffingMethod {
    Mle,
    AvgConstraint,
    BayesCc,
}

/// A staffing decision plus the evidence behind it.
///
/// `constraint_prob_at_c` is the probability that both constraints hold at
/// the chosen `c` under the method's model of parameter uncertainty: exactly
/// 1 for the plug-in solver (a point mass is either feasible or not), and a
/// Monte Carlo posterior estimate for the other two.
#[derive(Debug, Clone, Serialize)]
pub struct StaffingResult<T> {
    pub method: StaffingMethod,
    pub c: u32,
    pub constraint_prob_at_c: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_posterior: Option<GammaDist<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_posterior: Option<GammaDist<T>>,
}

impl<T: Real + Serialize> StaffingResult<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

#[derive(Debug, Clone, Error)]
pub enum QueueError {
    #[error("dataset must contain at least one customer")]
    EmptyDataset,
    #[error("columns have unequal lengths: T={arrivals}, S={starts}, E={ends}")]
    RaggedColumns {
        arrivals: usize,
        starts: usize,
        ends: usize,
    },
    #[error("row {row}: {what}")]
    InvalidRow { row: usize, what: &'static str },
    #[error("expected CSV header 'T,S,E', got '{got}'")]
    BadHeader { got: String },
    #[error("row {row}: {detail}")]
    BadRowSyntax { row: usize, detail: String },
    #[error("{what} must be positive and finite, got {value}")]
    InvalidRate { what: &'static str, value: f64 },
    #[error("{what} must lie strictly inside (0, 1), got {value}")]
    ProbabilityOutOfRange { what: &'static str, value: f64 },
    #[error("c_max must be at least 1")]
    ZeroCMax,
    #[error("server count must be at least 1")]
    ZeroServers,
    #[error("unstable queue: traffic intensity {rho} >= 1 at c = {c}")]
    Unstable { c: u32, rho: f64 },
    #[error("degenerate data: total {what} is zero")]
    DegenerateData { what: &'static str },
    #[error("no feasible server count <= {c_max}; binding constraint: {binding}")]
    Infeasible { c_max: u32, binding: &'static str },
    #[error("mc_draws must be at least 1")]
    ZeroDraws,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

/// Simulate `n` customers through a single-server FCFS queue with
/// exponential interarrivals (rate `lambda0`) and services (rate `mu0`).
///
/// `T_i = T_{i-1} + Exp(λ)`, `S_i = max(T_i, E_{i-1})`, `E_i = S_i + Exp(μ)`;
/// deterministic given the seed. Stability is not required — the likelihood
/// downstream only consumes the two duration sums.
pub fn simulate_queue_data<T: Real>(
    lambda0: T,
    mu0: T,
    n: usize,
    rng: &mut RngHandle,
) -> Result<QueueDataset<T>, QueueError> {
    for (what, v) in [("lambda0", lambda0), ("mu0", mu0)] {
        if !v.is_finite() || v <= T::zero() {
            return Err(QueueError::InvalidRate {
                what,
                value: v.as_f64(),
            });
        }
    }
    if n == 0 {
        return Err(QueueError::EmptyDataset);
    }
    let mut arrivals = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(n);
    let mut ends = Vec::with_capacity(n);
    let mut t = T::zero();
    let mut prev_end = T::zero();
    for _ in 0..n {
        t += T::of(rng.exponential(lambda0.as_f64()));
        let s = if prev_end > t { prev_end } else { t };
        let e = s + T::of(rng.exponential(mu0.as_f64()));
        arrivals.push(t);
        starts.push(s);
        ends.push(e);
        prev_end = e;
    }
    QueueDataset::new(arrivals, starts, ends)
}

/// Stationary probability that an arriving customer is delayed in an M/M/c
/// queue (the Erlang-C value), for `ρ = λ/(cμ) < 1`.
///
/// Evaluated through the Erlang-B recurrence
/// `B_k = r·B_{k-1}/(k + r·B_{k-1})` followed by
/// `C = B_c / (1 - ρ·(1 - B_c))`, which is algebraically identical to the
/// factorial-sum formula but never forms a factorial.
pub fn erlang_delay_prob<T: Real>(c: u32, lambda: T, mu: T) -> Result<T, QueueError> {
    if c == 0 {
        return Err(QueueError::ZeroServers);
    }
    for (what, v) in [("lambda", lambda), ("mu", mu)] {
        if !v.is_finite() || v <= T::zero() {
            return Err(QueueError::InvalidRate {
                what,
                value: v.as_f64(),
            });
        }
    }
    let r = lambda / mu;
    let rho = r / T::of(c as f64);
    if rho >= T::one() {
        return Err(QueueError::Unstable {
            c,
            rho: rho.as_f64(),
        });
    }
    let mut b = T::one();
    for k in 1..=c {
        let rb = r * b;
        b = rb / (T::of(k as f64) + rb);
    }
    Ok(b / (T::one() - rho * (T::one() - b)))
}

/// Exponential-rate MLEs from the dataset:
/// `λ̂ = n / Σ interarrivals`, `μ̂ = n / Σ service durations`.
pub fn mle_rates<T: Real>(data: &QueueDataset<T>) -> Result<(T, T), QueueError> {
    let ia = data.interarrival_sum();
    let sv = data.service_sum();
    if ia.is_nan() || ia <= T::zero() {
        return Err(QueueError::DegenerateData {
            what: "interarrival time",
        });
    }
    if sv.is_nan() || sv <= T::zero() {
        return Err(QueueError::DegenerateData {
            what: "service time",
        });
    }
    let n = T::of(data.len() as f64);
    Ok((n / ia, n / sv))
}

/// True at `(λ, μ)` when both staffing constraints hold strictly at `c`.
fn constraints_hold<T: Real>(c: u32, lambda: T, mu: T, alpha: T) -> bool {
    if T::of(c as f64) * mu - lambda <= T::zero() {
        return false;
    }
    match erlang_delay_prob(c, lambda, mu) {
        Ok(delay) => alpha - delay > T::zero(),
        Err(_) => false,
    }
}

/// Smallest stable-and-QoS-feasible `c <= c_max` at fixed rates, if any.
///
/// Per-parameter feasibility is monotone in `c` (stability relaxes and the
/// delay probability decreases), so this is both the plug-in optimizer and
/// the building block for the Monte Carlo solvers.
pub fn min_feasible_servers<T: Real>(lambda: T, mu: T, alpha: T, c_max: u32) -> Option<u32> {
    (1..=c_max).find(|&c| constraints_hold(c, lambda, mu, alpha))
}

/// Plug-in staffing at the MLEs.
pub fn staff_mle<T: Real>(
    data: &QueueDataset<T>,
    alpha: T,
    c_max: u32,
) -> Result<StaffingResult<T>, QueueError> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(QueueError::ProbabilityOutOfRange {
            what: "alpha",
            value: alpha.as_f64(),
        });
    }
    if c_max == 0 {
        return Err(QueueError::ZeroCMax);
    }
    let (lambda_hat, mu_hat) = mle_rates(data)?;
    match min_feasible_servers(lambda_hat, mu_hat, alpha, c_max) {
        Some(c) => Ok(StaffingResult {
            method: StaffingMethod::Mle,
            c,
            constraint_prob_at_c: T::one(),
            lambda_posterior: None,
            mu_posterior: None,
        }),
        None => Err(QueueError::Infeasible {
            c_max,
            binding: binding_constraint(lambda_hat, mu_hat, c_max),
        }),
    }
}

fn binding_constraint<T: Real>(lambda: T, mu: T, c_max: u32) -> &'static str {
    let any_stable = (1..=c_max).any(|c| T::of(c as f64) * mu - lambda > T::zero());
    if any_stable {
        "quality of service"
    } else {
        "stability"
    }
}

/// Monte Carlo posterior probability that both constraints hold at `c`.
///
/// Draws `(λ, μ)` pairs from the Gamma posteriors; draws with `cμ <= λ` are
/// scored as violating (the delay probability is taken as 1 there), so the
/// integral is well defined over the whole support. Deterministic given the
/// handle's seed.
pub fn posterior_constraint_prob<T: Real>(
    c: u32,
    lambda_post: &GammaDist<T>,
    mu_post: &GammaDist<T>,
    alpha: T,
    mc_draws: usize,
    rng: &mut RngHandle,
) -> Result<T, QueueError> {
    if c == 0 {
        return Err(QueueError::ZeroServers);
    }
    if mc_draws == 0 {
        return Err(QueueError::ZeroDraws);
    }
    let mut satisfied = 0usize;
    for _ in 0..mc_draws {
        let lambda = lambda_post.sample_one(rng);
        let mu = mu_post.sample_one(rng);
        if constraints_hold(c, lambda, mu, alpha) {
            satisfied += 1;
        }
    }
    Ok(T::of(satisfied as f64) / T::of(mc_draws as f64))
}

/// Shared setup for the two posterior-based solvers: conjugate updates plus
/// one common set of posterior draws, stored as each draw's minimal feasible
/// server count (`None` when even `c_max` fails).
struct PosteriorDraws<T> {
    lambda_post: GammaDist<T>,
    mu_post: GammaDist<T>,
    min_c: Vec<Option<u32>>,
    draws: Vec<(T, T)>,
}

fn posterior_draws<T: Real>(
    data: &QueueDataset<T>,
    problem: &StaffingProblem<T>,
    mc_draws: usize,
    rng: &mut RngHandle,
) -> Result<PosteriorDraws<T>, QueueError> {
    if mc_draws == 0 {
        return Err(QueueError::ZeroDraws);
    }
    let n = data.len() as u64;
    let lambda_post = gamma_posterior_update(&problem.lambda_prior, n, data.interarrival_sum())?;
    let mu_post = gamma_posterior_update(&problem.mu_prior, n, data.service_sum())?;
    let mut min_c = Vec::with_capacity(mc_draws);
    let mut draws = Vec::with_capacity(mc_draws);
    for _ in 0..mc_draws {
        let lambda = lambda_post.sample_one(rng);
        let mu = mu_post.sample_one(rng);
        min_c.push(min_feasible_servers(lambda, mu, problem.alpha, problem.c_max));
        draws.push((lambda, mu));
    }
    Ok(PosteriorDraws {
        lambda_post,
        mu_post,
        min_c,
        draws,
    })
}

/// Chance-constrained staffing: the smallest `c` whose posterior probability
/// of joint constraint satisfaction reaches `β`.
///
/// All candidate `c` are scored against one common set of posterior draws,
/// and per-draw satisfaction is monotone in `c`, so the scan is an exact
/// minimizer for the Monte Carlo approximation it returns.
pub fn staff_bayes_cc<T: Real>(
    data: &QueueDataset<T>,
    problem: &StaffingProblem<T>,
    mc_draws: usize,
    rng: &mut RngHandle,
) -> Result<StaffingResult<T>, QueueError> {
    let post = posterior_draws(data, problem, mc_draws, rng)?;
    let total = T::of(mc_draws as f64);
    let mut satisfied_counts = vec![0usize; problem.c_max as usize + 1];
    for c in post.min_c.iter().flatten() {
        satisfied_counts[*c as usize] += 1;
    }
    let mut cumulative = 0usize;
    for c in 1..=problem.c_max {
        cumulative += satisfied_counts[c as usize];
        let prob = T::of(cumulative as f64) / total;
        if prob >= problem.beta {
            return Ok(StaffingResult {
                method: StaffingMethod::BayesCc,
                c,
                constraint_prob_at_c: prob,
                lambda_posterior: Some(post.lambda_post),
                mu_posterior: Some(post.mu_post),
            });
        }
    }
    Err(QueueError::Infeasible {
        c_max: problem.c_max,
        binding: "joint chance constraint",
    })
}

/// Average-constraint staffing: the smallest `c` with
/// `E[λ - cμ] < 0` and `E[delay(c) - α] < 0` under the posteriors,
/// expectations by Monte Carlo with unstable draws scored at delay 1.
pub fn staff_avg_constraint<T: Real>(
    data: &QueueDataset<T>,
    problem: &StaffingProblem<T>,
    mc_draws: usize,
    rng: &mut RngHandle,
) -> Result<StaffingResult<T>, QueueError> {
    let post = posterior_draws(data, problem, mc_draws, rng)?;
    let total = T::of(mc_draws as f64);
    let mean_lambda: T = post.draws.iter().map(|&(l, _)| l).sum::<T>() / total;
    let mean_mu: T = post.draws.iter().map(|&(_, m)| m).sum::<T>() / total;

    for c in 1..=problem.c_max {
        let cf = T::of(c as f64);
        if mean_lambda - cf * mean_mu >= T::zero() {
            continue;
        }
        let mut delay_sum = T::zero();
        for &(lambda, mu) in &post.draws {
            let delay = if cf * mu - lambda > T::zero() {
                erlang_delay_prob(c, lambda, mu)?
            } else {
                T::one()
            };
            delay_sum += delay;
        }
        if delay_sum / total - problem.alpha < T::zero() {
            let satisfied = post
                .min_c
                .iter()
                .filter(|mc| mc.is_some_and(|m| m <= c))
                .count();
            return Ok(StaffingResult {
                method: StaffingMethod::AvgConstraint,
                c,
                constraint_prob_at_c: T::of(satisfied as f64) / total,
                lambda_posterior: Some(post.lambda_post),
                mu_posterior: Some(post.mu_post),
            });
        }
    }
    Err(QueueError::Infeasible {
        c_max: problem.c_max,
        binding: "average constraint",
    })
}

/// Whether staffing level `c` violates the requirements at the true rates:
/// unstable (`cμ0 <= λ0`) or delay probability at least `alpha`.
pub fn qos_violated<T: Real>(c: u32, lambda0: T, mu0: T, alpha: T) -> bool {
    if c == 0 || T::of(c as f64) * mu0 - lambda0 <= T::zero() {
        return true;
    }
    match erlang_delay_prob(c, lambda0, mu0) {
        Ok(delay) => delay >= alpha,
        Err(_) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA0: f64 = 16.0;
    const MU0: f64 = 4.0;
    const ALPHA: f64 = 0.37;

    fn degenerate_gamma(at: f64) -> GammaDist<f64> {
        // Shape so large the distribution is effectively a point mass.
        let shape = 1e8;
        GammaDist::new(shape, shape / at).unwrap()
    }

    #[test]
    fn simulation_single_customer() {
        let mut rng = RngHandle::new(1);
        let data = simulate_queue_data(2.0, 3.0, 1, &mut rng).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data.service_starts()[0], data.arrivals()[0]);
        assert!(data.service_ends()[0] > data.service_starts()[0]);
    }

    #[test]
    fn simulation_interarrivals_recoverable() {
        let mut rng = RngHandle::new(3);
        let data = simulate_queue_data(LAMBDA0, MU0, 500, &mut rng).unwrap();
        // Reconstructing gaps from arrival diffs returns the generated
        // exponentials exactly; their sum is the last arrival time.
        let last = *data.arrivals().last().unwrap();
        assert!((data.interarrival_sum() - last).abs() < 1e-9);
        // FCFS: starts never precede arrivals nor the previous end.
        for i in 1..data.len() {
            assert!(data.service_starts()[i] >= data.arrivals()[i]);
            assert!(data.service_starts()[i] >= data.service_ends()[i - 1]);
        }
    }

    #[test]
    fn simulation_mean_interarrival() {
        let mut rng = RngHandle::new(7);
        let data = simulate_queue_data(LAMBDA0, MU0, 100_000, &mut rng).unwrap();
        let mean_gap = data.interarrival_sum() / data.len() as f64;
        assert!((mean_gap - 1.0 / LAMBDA0).abs() / (1.0 / LAMBDA0) < 0.01);
    }

    #[test]
    fn erlang_single_server_reduces_to_rho() {
        for (l, m) in [(1.0, 10.0), (0.3, 0.4), (5.0, 8.0)] {
            let d: f64 = erlang_delay_prob(1, l, m).unwrap();
            assert!((d - l / m).abs() < 1e-14, "λ={l}, μ={m}");
        }
    }

    #[test]
    fn erlang_default_instance_values() {
        // Exact fractions: 128/231 at c=5 and 256/899 at c=6.
        let d5: f64 = erlang_delay_prob(5, LAMBDA0, MU0).unwrap();
        assert!((d5 - 128.0 / 231.0).abs() < 1e-14);
        assert!((d5 - 0.554113).abs() < 1e-4);
        let d6: f64 = erlang_delay_prob(6, LAMBDA0, MU0).unwrap();
        assert!((d6 - 256.0 / 899.0).abs() < 1e-14);
        assert!((d6 - 0.284754).abs() < 1e-4);
    }

    #[test]
    fn erlang_rejects_unstable_and_bad_inputs() {
        assert!(matches!(
            erlang_delay_prob(4, LAMBDA0, MU0),
            Err(QueueError::Unstable { .. })
        ));
        assert!(erlang_delay_prob(0, 1.0, 2.0).is_err());
        assert!(erlang_delay_prob(2, -1.0, 2.0).is_err());
    }

    #[test]
    fn erlang_decreasing_in_servers_and_in_unit_interval() {
        let mut prev = 1.0;
        for c in 5..30 {
            let d: f64 = erlang_delay_prob(c, LAMBDA0, MU0).unwrap();
            assert!(d > 0.0 && d < 1.0);
            assert!(d < prev, "c={c}: {d} !< {prev}");
            prev = d;
        }
    }

    #[test]
    fn erlang_matches_birth_death_stationary_oracle() {
        // Truncated M/M/c stationary distribution: π_k ∝ Π λ/(min(j,c)·μ);
        // the delay probability is the stationary mass at or above c.
        fn birth_death_delay(c: u32, lambda: f64, mu: f64, states: usize) -> f64 {
            let mut p = 1.0_f64;
            let mut total = 1.0_f64;
            let mut at_or_above_c = if c == 0 { 1.0 } else { 0.0 };
            for k in 1..=states {
                let service = mu * (k.min(c as usize)) as f64;
                p *= lambda / service;
                total += p;
                if k >= c as usize {
                    at_or_above_c += p;
                }
            }
            at_or_above_c / total
        }
        for c in [1u32, 2, 3, 5, 8, 12, 20] {
            for rho in [0.3, 0.5, 0.7, 0.8, 0.9] {
                let mu = 4.0;
                let lambda = rho * c as f64 * mu;
                let ours: f64 = erlang_delay_prob(c, lambda, mu).unwrap();
                let oracle = birth_death_delay(c, lambda, mu, 10_000);
                assert!(
                    (ours - oracle).abs() < 1e-8,
                    "c={c}, rho={rho}: {ours} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn erlang_f32_tracks_f64() {
        let coarse = erlang_delay_prob(6, 16.0_f32, 4.0).unwrap() as f64;
        let fine: f64 = erlang_delay_prob(6, 16.0, 4.0).unwrap();
        assert!((coarse - fine).abs() < 1e-5);
    }

    #[test]
    fn mle_hand_computed_values() {
        let data = QueueDataset::<f64>::new(
            vec![0.5, 2.0],
            vec![0.5, 2.0],
            vec![0.75, 2.25],
        )
        .unwrap();
        let (lambda_hat, mu_hat) = mle_rates(&data).unwrap();
        assert!((lambda_hat - 1.0).abs() < 1e-14); // 2 / (0.5 + 1.5)
        assert!((mu_hat - 4.0).abs() < 1e-14); // 2 / (0.25 + 0.25)
    }

    #[test]
    fn mle_consistent_on_simulated_data() {
        let mut rng = RngHandle::new(11);
        let data = simulate_queue_data(LAMBDA0, MU0, 100_000, &mut rng).unwrap();
        let (lambda_hat, mu_hat) = mle_rates(&data).unwrap();
        assert!((lambda_hat - LAMBDA0).abs() / LAMBDA0 < 0.01, "{lambda_hat}");
        assert!((mu_hat - MU0).abs() / MU0 < 0.01, "{mu_hat}");
    }

    #[test]
    fn mle_degenerate_data_rejected() {
        let data = QueueDataset::new(vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            mle_rates(&data),
            Err(QueueError::DegenerateData { .. })
        ));
    }

    /// Dataset whose MLEs are exactly (16, 4): gaps of 1/16, services of 1/4.
    fn exact_rate_dataset(n: usize) -> QueueDataset<f64> {
        let mut arrivals = Vec::with_capacity(n);
        let mut starts = Vec::with_capacity(n);
        let mut ends = Vec::with_capacity(n);
        let mut t = 0.0;
        let mut prev_end = 0.0_f64;
        for _ in 0..n {
            t += 1.0 / 16.0;
            let s = prev_end.max(t);
            let e = s + 0.25;
            arrivals.push(t);
            starts.push(s);
            ends.push(e);
            prev_end = e;
        }
        QueueDataset::new(arrivals, starts, ends).unwrap()
    }

    #[test]
    fn staff_mle_picks_six_at_the_default_instance() {
        let data = exact_rate_dataset(64);
        let result = staff_mle(&data, ALPHA, 50).unwrap();
        assert_eq!(result.c, 6);
        assert_eq!(result.method, StaffingMethod::Mle);
        assert_eq!(result.constraint_prob_at_c, 1.0);
    }

    #[test]
    fn staff_mle_light_traffic() {
        // λ̂ = 1, μ̂ = 10: the single-server delay probability is 0.1 < 0.5.
        let data = QueueDataset::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![1.1, 2.1]).unwrap();
        let result = staff_mle(&data, 0.5, 50).unwrap();
        assert_eq!(result.c, 1);
    }

    #[test]
    fn staff_mle_infeasible_names_binding_constraint() {
        let data = exact_rate_dataset(64);
        let err = staff_mle(&data, ALPHA, 3).unwrap_err();
        match err {
            QueueError::Infeasible { binding, .. } => assert_eq!(binding, "stability"),
            other => panic!("unexpected error {other}"),
        }
        // With room for stability but a brutal QoS cap, the cap binds.
        let err = staff_mle(&data, 1e-9, 5).unwrap_err();
        match err {
            QueueError::Infeasible { binding, .. } => {
                assert_eq!(binding, "quality of service")
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn posterior_prob_at_point_mass_posteriors() {
        let lambda_post = degenerate_gamma(LAMBDA0);
        let mu_post = degenerate_gamma(MU0);
        let mut rng = RngHandle::new(5);
        let p6: f64 =
            posterior_constraint_prob(6, &lambda_post, &mu_post, ALPHA, 4000, &mut rng).unwrap();
        assert!(p6 > 0.999, "{p6}");
        let p5: f64 =
            posterior_constraint_prob(5, &lambda_post, &mu_post, ALPHA, 4000, &mut rng).unwrap();
        assert!(p5 < 0.001, "{p5}");
    }

    #[test]
    fn posterior_prob_vacuous_qos() {
        // α close to 1 with plenty of servers: only stability matters.
        let lambda_post = GammaDist::new(100.0, 100.0 / LAMBDA0).unwrap();
        let mu_post = GammaDist::new(100.0, 100.0 / MU0).unwrap();
        let mut rng = RngHandle::new(6);
        let p: f64 = posterior_constraint_prob(
            40,
            &lambda_post,
            &mu_post,
            1.0 - 1e-9,
            4000,
            &mut rng,
        )
        .unwrap();
        assert!(p > 0.999, "{p}");
    }

    #[test]
    fn posterior_prob_seed_stability() {
        let lambda_post = GammaDist::new(400.0, 25.0).unwrap();
        let mu_post = GammaDist::new(400.0, 100.0).unwrap();
        let p1: f64 = posterior_constraint_prob(
            6,
            &lambda_post,
            &mu_post,
            ALPHA,
            100_000,
            &mut RngHandle::new(1),
        )
        .unwrap();
        let p2: f64 = posterior_constraint_prob(
            6,
            &lambda_post,
            &mu_post,
            ALPHA,
            100_000,
            &mut RngHandle::new(2),
        )
        .unwrap();
        let se = (p1 * (1.0 - p1) / 100_000.0).sqrt();
        assert!((p1 - p2).abs() <= 3.0 * se, "{p1} vs {p2}");
    }

    #[test]
    fn posterior_prob_nondecreasing_in_servers() {
        let lambda_post = GammaDist::new(200.0, 12.5).unwrap();
        let mu_post = GammaDist::new(200.0, 50.0).unwrap();
        let mut prev: f64 = 0.0;
        for c in 1..=12 {
            let p = posterior_constraint_prob(
                c,
                &lambda_post,
                &mu_post,
                ALPHA,
                50_000,
                &mut RngHandle::new(77),
            )
            .unwrap();
            let se = (0.25_f64 / 50_000.0).sqrt();
            assert!(p >= prev - 3.0 * se, "c={c}: {p} < {prev}");
            prev = p;
        }
    }

    #[test]
    fn bayes_cc_recovers_true_optimum_with_plenty_of_data() {
        let problem = StaffingProblem::new(ALPHA, 0.95).unwrap();
        let mut hits = 0;
        let reps = 20;
        for rep in 0..reps {
            let mut rng = RngHandle::new(1000 + rep);
            let data = simulate_queue_data(LAMBDA0, MU0, 10_000, &mut rng).unwrap();
            let result = staff_bayes_cc(&data, &problem, 20_000, &mut rng).unwrap();
            assert!(result.constraint_prob_at_c >= 0.95);
            if result.c == 6 {
                hits += 1;
            }
        }
        assert!(hits as f64 / reps as f64 >= 0.95, "hits {hits}/{reps}");
    }

    #[test]
    fn bayes_cc_weakening_beta_never_raises_c() {
        let problem_tight = StaffingProblem::new(ALPHA, 0.95).unwrap();
        let problem_loose = StaffingProblem::new(ALPHA, 0.05).unwrap();
        let mut rng = RngHandle::new(42);
        let data = simulate_queue_data(LAMBDA0, MU0, 200, &mut rng).unwrap();
        let tight = staff_bayes_cc(&data, &problem_tight, 20_000, &mut RngHandle::new(9))
            .unwrap();
        let loose = staff_bayes_cc(&data, &problem_loose, 20_000, &mut RngHandle::new(9))
            .unwrap();
        let mle = staff_mle(&data, ALPHA, 50).unwrap();
        assert!(loose.c <= tight.c);
        assert!(loose.c <= mle.c);
    }

    #[test]
    fn avg_constraint_point_mass_matches_plug_in() {
        let problem = StaffingProblem::with_priors(
            ALPHA,
            0.95,
            50,
            degenerate_gamma(LAMBDA0),
            degenerate_gamma(MU0),
        )
        .unwrap();
        // A tiny dataset barely moves the enormous pseudo-count prior, so the
        // posterior stays essentially a point mass at (16, 4).
        let data = exact_rate_dataset(2);
        let result =
            staff_avg_constraint(&data, &problem, 20_000, &mut RngHandle::new(3)).unwrap();
        assert_eq!(result.c, 6);
    }

    #[test]
    fn avg_constraint_never_exceeds_chance_constraint() {
        let problem = StaffingProblem::new(ALPHA, 0.95).unwrap();
        for rep in 0..20 {
            let mut rng = RngHandle::new(500 + rep);
            let data = simulate_queue_data(LAMBDA0, MU0, 100, &mut rng).unwrap();
            let avg =
                staff_avg_constraint(&data, &problem, 10_000, &mut RngHandle::new(2 * rep))
                    .unwrap();
            let cc = staff_bayes_cc(&data, &problem, 10_000, &mut RngHandle::new(2 * rep + 1))
                .unwrap();
            assert!(avg.c <= cc.c, "rep {rep}: avg {} > cc {}", avg.c, cc.c);
        }
    }

    #[test]
    fn avg_constraint_vacuous_qos_reduces_to_stability() {
        // λ = 16.4 keeps c = 4 strictly unstable in expectation, so with α
        // close to 1 the expected-stability constraint alone sets c = 5.
        let problem = StaffingProblem::with_priors(
            1.0 - 1e-9,
            0.95,
            50,
            degenerate_gamma(16.4),
            degenerate_gamma(MU0),
        )
        .unwrap();
        let data = exact_rate_dataset(2);
        let result =
            staff_avg_constraint(&data, &problem, 5_000, &mut RngHandle::new(4)).unwrap();
        assert_eq!(result.c, 5);
    }

    #[test]
    fn qos_violation_at_true_parameters() {
        assert!(qos_violated(5, LAMBDA0, MU0, ALPHA)); // delay 0.554 >= 0.37
        assert!(!qos_violated(6, LAMBDA0, MU0, ALPHA)); // delay 0.285 < 0.37
        assert!(qos_violated(4, LAMBDA0, MU0, ALPHA)); // 16 = 4·4: unstable
    }

    #[test]
    fn dataset_invariant_errors_name_row_and_field() {
        let err = QueueDataset::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![1.5, 1.9]).unwrap_err();
        assert!(err.to_string().contains("row 1"));
        assert!(err.to_string().contains("service end before start"));
        let err = QueueDataset::new(vec![1.0], vec![0.5], vec![2.0]).unwrap_err();
        assert!(err.to_string().contains("service start before arrival"));
    }

    #[test]
    fn dataset_csv_roundtrip_is_identity() {
        let mut rng = RngHandle::new(15);
        let data = simulate_queue_data(LAMBDA0, MU0, 400, &mut rng).unwrap();
        let csv = data.to_csv();
        assert_eq!(csv.lines().next(), Some("T,S,E"));
        assert_eq!(csv.lines().count(), 401);
        let parsed = QueueDataset::from_csv_str(&csv).unwrap();
        assert_eq!(parsed, data);
    }

    #[test]
    fn dataset_csv_rejects_malformed_input() {
        assert!(matches!(
            QueueDataset::<f64>::from_csv_str("a,b,c\n1,2,3\n"),
            Err(QueueError::BadHeader { .. })
        ));
        assert!(matches!(
            QueueDataset::<f64>::from_csv_str("T,S,E\n1,2\n"),
            Err(QueueError::BadRowSyntax { .. })
        ));
        let err = QueueDataset::<f64>::from_csv_str("T,S,E\n1.0,1.0,0.5\n").unwrap_err();
        assert!(err.to_string().contains("service end before start"));
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn erlang_in_open_unit_interval(
                c in 1u32..30,
                rho in 0.01_f64..0.99,
                mu in 0.1_f64..20.0,
            ) {
                let lambda = rho * c as f64 * mu;
                let d = erlang_delay_prob(c, lambda, mu).unwrap();
                prop_assert!(d > 0.0 && d < 1.0);
            }

            #[test]
            fn simulated_dataset_roundtrips_through_csv(
                seed in 0u64..500,
                n in 1usize..40,
            ) {
                let mut rng = RngHandle::new(seed);
                let data = simulate_queue_data(16.0, 4.0, n, &mut rng).unwrap();
                let parsed = QueueDataset::from_csv_str(&data.to_csv()).unwrap();
                prop_assert_eq!(parsed, data);
            }
        }
    }
}
