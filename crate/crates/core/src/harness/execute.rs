use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::steppers::{parameter_warnings, run, RunOutcome, StopReason};

use super::config::{ExperimentConfig, ResolvedParameters, RunSpec};
use super::report::{analyze_trace, ErrorReference, RateAnalysis, RateFit};
use super::HarnessError;

/// Exact header of every per-run trace file.
pub const CSV_HEADER: [&str; 6] = ["k", "f", "grad_norm", "err_norm", "ratio", "bound"];
pub const SUMMARY_FILE: &str = "summary.json";

/// The per-run entry of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub id: String,
    pub problem: String,
    pub algorithm: String,
    pub stop_reason: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_grad_norm: Option<f64>,
    pub final_error: Option<f64>,
    pub error_reference: ErrorReference,
    pub rho: Option<f64>,
    pub rho_at: &'static str,
    pub classification: String,
    pub rate: RateFit,
    pub finite_termination: bool,
    pub ratios: Vec<f64>,
    pub bounds: Vec<f64>,
    pub parameters: ResolvedParameters,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

/// Everything one run produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub analysis: RateAnalysis,
    pub report: RateReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub runs: Vec<RunResult>,
    pub output_dir: PathBuf,
}

impl ExperimentResult {
    /// `0` when every run stopped by a tolerance (or a completed horizon), else `2`.
    pub fn exit_code(&self) -> i32 {
        if self.runs.iter().all(|r| r.outcome.stop.is_converged()) {
            0
        } else {
            2
        }
    }

    pub fn summary_path(&self) -> PathBuf {
        self.output_dir.join(SUMMARY_FILE)
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    exit_code: i32,
    runs: Vec<&'a RateReport>,
}

/// Runs every configured experiment concurrently and writes the CSVs and `summary.json`.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|source| HarnessError::Io {
        context: format!("creating {}", cfg.output_dir.display()),
        source,
    })?;

    let results: Vec<Result<RunResult, HarnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .runs
            .iter()
            .map(|spec| scope.spawn(move || execute_run(spec, &cfg.output_dir, cfg.write_csv)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let result = ExperimentResult {
        runs,
        output_dir: cfg.output_dir.clone(),
    };
    let summary = Summary {
        exit_code: result.exit_code(),
        runs: result.runs.iter().map(|r| &r.report).collect(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary is serializable");
    let path = result.summary_path();
    fs::write(&path, json + "\n").map_err(|source| HarnessError::Io {
        context: format!("writing {}", path.display()),
        source,
    })?;
    Ok(result)
}

/// Runs one spec and analyses its trace without touching the file system.
pub fn run_spec(spec: &RunSpec) -> RunResult {
    let oracle = &spec.problem.oracle;
    let outcome = run(oracle, &spec.x0, &spec.config).unwrap_or_else(|e| RunOutcome {
        trace: Default::default(),
        stop: StopReason::NumericalFailure(e),
    });
    let warnings = parameter_warnings(oracle, &spec.x0, &spec.config)
        .unwrap_or_else(|e| vec![format!("parameter check failed: {e}")]);
    let analysis = analyze_trace(oracle, &spec.config, &spec.x0, &outcome.trace);
    let last = outcome.trace.last();
    let report = RateReport {
        id: spec.id.clone(),
        problem: spec.problem.name.clone(),
        algorithm: spec.config.algorithm.name().to_string(),
        stop_reason: outcome.stop.label(),
        converged: outcome.stop.is_converged(),
        iterations: outcome.trace.iterations(),
        final_grad_norm: last.map(|r| r.grad_norm),
        final_error: analysis.errors.last().copied(),
        error_reference: analysis.reference,
        rho: analysis.rho,
        rho_at: analysis.rho_at,
        classification: analysis.class().label(),
        rate: analysis.fit,
        finite_termination: analysis.finite_termination,
        ratios: analysis.ratios.iter().flatten().copied().collect(),
        bounds: analysis.bounds.iter().flatten().copied().collect(),
        parameters: spec.resolved_parameters(),
        warnings,
        csv: None,
    };
    RunResult {
        outcome,
        analysis,
        report,
    }
}

fn execute_run(spec: &RunSpec, dir: &Path, write_csv: bool) -> Result<RunResult, HarnessError> {
    let mut result = run_spec(spec);
    if write_csv {
        let name = format!("{}.csv", spec.id);
        let path = dir.join(&name);
        write_trace_csv(&path, &result).map_err(|e| HarnessError::Run {
            id: spec.id.clone(),
            message: format!("writing {}: {e}", path.display()),
        })?;
        result.report.csv = Some(name);
    }
    Ok(result)
}

/// Writes `k,f,grad_norm,err_norm,ratio,bound`; missing values are empty fields.
pub fn write_trace_csv(path: &Path, result: &RunResult) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    let a = &result.analysis;
    for (i, rec) in result.outcome.trace.records.iter().enumerate() {
        w.serialize((
            rec.k,
            rec.f,
            rec.grad_norm,
            a.errors.get(i).copied(),
            a.ratios.get(i).copied().flatten(),
            a.bounds.get(i).copied().flatten(),
        ))?;
    }
    w.flush()?;
    Ok(())
}
