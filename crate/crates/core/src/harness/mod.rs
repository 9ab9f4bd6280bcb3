//! Config-driven experiment runner.
//!
//! A JSON config lists runs (problem × algorithm × parameter overrides);
//! [`execute`] runs them concurrently, writes one trace CSV per run with the
//! header `k,f,grad_norm,err_norm,ratio,bound`, and a `summary.json` holding
//! each run's rate report and fully resolved parameters.

mod config;
mod execute;
mod ocp_check;
mod report;

pub use config::{
    load_config, load_config_with, parse_config, ExperimentConfig, LoadOptions,
    ResolvedParameters, RunSpec, WeightSpec, DEFAULT_OUTPUT_DIR,
};
pub use execute::{
    execute, run_spec, write_trace_csv, ExperimentResult, RateReport, RunResult, CSV_HEADER,
    SUMMARY_FILE,
};
pub use ocp_check::{
    problem_for_seed, solution_distance, trial_seed, verify_ocp, verify_ocp_with,
    OcpTrialFailure, OcpVerification, DEFAULT_OCP_TRIALS, OCP_TOLERANCE,
};
pub use report::{
    analyze_trace, classify_rate, error_ratios, noise_floor, ratio_bound, ErrorReference,
    RateAnalysis, RateClass, RateFit, FINITE_TERMINATION_RATIO, NOISE_FLOOR_ULPS,
    SHRINK_FACTOR, SLOPE_THRESHOLD,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("run `{id}`: {message}")]
    Run { id: String, message: String },
}

impl HarnessError {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
