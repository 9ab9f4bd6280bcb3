use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::ocp::{
    brute_force_lq, random_lq_problem, solve_lq_exact, verify_control_law, LqOcpProblem,
    LqOcpSolution,
};

/// Residual and disagreement threshold for a trial to pass.
pub const OCP_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_OCP_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OcpTrialFailure {
    /// Seed that regenerates the failing problem.
    pub seed: u64,
    pub disagreement: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OcpVerification {
    pub trials: usize,
    pub base_seed: u64,
    /// Largest scaled difference between exact and brute-force controls or cost.
    pub max_disagreement: f64,
    /// Largest control-law, costate or reconstruction residual.
    pub max_residual: f64,
    pub failures: Vec<OcpTrialFailure>,
}

impl OcpVerification {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Seed of trial `i`; each trial draws its problem from its own stream.
pub fn trial_seed(base: u64, i: usize) -> u64 {
    base.wrapping_add(i as u64)
}

pub fn problem_for_seed(seed: u64) -> LqOcpProblem {
    random_lq_problem(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Cross-checks [`solve_lq_exact`] against [`brute_force_lq`] on seeded random problems.
pub fn verify_ocp(seed: u64, trials: usize) -> OcpVerification {
    verify_ocp_with(seed, trials, solve_lq_exact)
}

/// [`verify_ocp`] with the solver under test supplied by the caller.
pub fn verify_ocp_with<F>(seed: u64, trials: usize, solver: F) -> OcpVerification
where
    F: Fn(&LqOcpProblem) -> Result<LqOcpSolution>,
{
    let mut report = OcpVerification {
        trials,
        base_seed: seed,
        max_disagreement: 0.0,
        max_residual: 0.0,
        failures: Vec::new(),
    };
    for i in 0..trials {
        let s = trial_seed(seed, i);
        let prob = problem_for_seed(s);
        let failure = |error: String| OcpTrialFailure {
            seed: s,
            disagreement: None,
            residual: None,
            error: Some(error),
        };
        let (exact, brute) = match (solver(&prob), brute_force_lq(&prob)) {
            (Ok(e), Ok(b)) => (e, b),
            (Err(e), _) | (_, Err(e)) => {
                report.failures.push(failure(e.to_string()));
                continue;
            }
        };
        let residual = match verify_control_law(&prob, &exact) {
            Ok(r) => r.max_residual(),
            Err(e) => {
                report.failures.push(failure(e.to_string()));
                continue;
            }
        };
        let disagreement = solution_distance(&exact, &brute);
        report.max_disagreement = report.max_disagreement.max(disagreement);
        report.max_residual = report.max_residual.max(residual);
        // NaN must fail, so compare with negated <=
        if !(disagreement <= OCP_TOLERANCE && residual <= OCP_TOLERANCE) {
            report.failures.push(OcpTrialFailure {
                seed: s,
                disagreement: Some(disagreement),
                residual: Some(residual),
                error: None,
            });
        }
    }
    report
}

/// Max over controls and cost of `|a − b| / max(1, |b|)`.
pub fn solution_distance(a: &LqOcpSolution, b: &LqOcpSolution) -> f64 {
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
    if a.controls.len() != b.controls.len() {
        return f64::INFINITY;
    }
    let mut worst = rel(a.cost, b.cost);
    for (ua, ub) in a.controls.iter().zip(&b.controls) {
        if ua.dim() != ub.dim() {
            return f64::INFINITY;
        }
        for (x, y) in ua.iter().zip(ub.iter()) {
            worst = worst.max(rel(*x, *y));
        }
    }
    worst
}
