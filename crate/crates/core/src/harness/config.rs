use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::linalg::{DenseMatrix, Vector};
use crate::problems::{problem_by_name, ProblemSpec};
use crate::steppers::{default_parameters, Algorithm, InnerMode, StepperConfig, Weight};

use super::HarnessError;

/// Directory used when neither the config nor the caller names one.
pub const DEFAULT_OUTPUT_DIR: &str = "results";

/// A weight written either as a scalar `s` (meaning `s·I`) or as rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

impl WeightSpec {
    fn to_weight(&self) -> Result<Weight, String> {
        match self {
            WeightSpec::Scalar(s) => Ok(Weight::Scalar(*s)),
            WeightSpec::Matrix(rows) => DenseMatrix::from_nested(rows)
                .map(Weight::Matrix)
                .map_err(|e| e.to_string()),
        }
    }

    pub fn from_weight(w: &Weight) -> Self {
        match w {
            Weight::Scalar(s) => WeightSpec::Scalar(*s),
            Weight::Matrix(m) => WeightSpec::Matrix(m.to_nested()),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    id: Option<String>,
    problem: String,
    algorithm: String,
    x0: Option<Vec<f64>>,
    seed: Option<u64>,
    r: Option<WeightSpec>,
    m: Option<WeightSpec>,
    d: Option<Vec<f64>>,
    gd_step: Option<f64>,
    horizon: Option<usize>,
    horizon_cap: Option<usize>,
    inner_mode: Option<InnerMode>,
    grad_tol: Option<f64>,
    step_tol: Option<f64>,
    max_iter: Option<usize>,
    difference_guard: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    runs: Vec<RawRun>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    csv: Option<bool>,
}

/// Caller-side overrides applied while loading.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Replaces the document-level seed; runs with their own seed keep it.
    pub seed: Option<u64>,
    /// Replaces the document's `output_dir`.
    pub output_dir: Option<PathBuf>,
}

/// Every parameter a run actually uses, as written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedParameters {
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<WeightSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<WeightSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gd_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub horizon_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_mode: Option<InnerMode>,
    pub grad_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    pub difference_guard: f64,
    pub x0: Vec<f64>,
    pub seed: u64,
    /// Names of the parameters filled in by the default rule.
    pub defaulted: Vec<String>,
}

/// One fully resolved run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub id: String,
    pub problem: ProblemSpec,
    pub x0: Vector,
    pub config: StepperConfig,
    pub seed: u64,
    pub defaulted: Vec<String>,
}

impl RunSpec {
    /// Builds a run from code, filling unset parameters by [`default_parameters`].
    pub fn with_defaults(
        id: impl Into<String>,
        problem: ProblemSpec,
        x0: Option<Vector>,
        algorithm: Algorithm,
    ) -> crate::Result<Self> {
        let x0 = x0.unwrap_or_else(|| problem.recommended_x0.clone());
        let config = default_parameters(&problem.oracle, &x0, algorithm)?;
        let defaulted = used_parameters(algorithm).iter().map(|s| s.to_string()).collect();
        Ok(RunSpec {
            id: id.into(),
            problem,
            x0,
            config,
            seed: 0,
            defaulted,
        })
    }

    pub fn resolved_parameters(&self) -> ResolvedParameters {
        let c = &self.config;
        ResolvedParameters {
            algorithm: c.algorithm.name().to_string(),
            r: c.r.as_ref().map(WeightSpec::from_weight),
            m: c.m.as_ref().map(WeightSpec::from_weight),
            d: c.d.as_ref().map(|d| d.as_slice().to_vec()),
            gd_step: c.gd_step,
            horizon: c.n_horizon,
            horizon_cap: c.horizon_cap,
            inner_mode: matches!(c.algorithm, Algorithm::AlgIII | Algorithm::AlgIV)
                .then(|| c.effective_inner_mode()),
            grad_tol: c.grad_tol,
            step_tol: c.step_tol,
            max_iter: c.max_iter,
            difference_guard: c.difference_guard,
            x0: self.x0.as_slice().to_vec(),
            seed: self.seed,
            defaulted: self.defaulted.clone(),
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub runs: Vec<RunSpec>,
    pub output_dir: PathBuf,
    /// Write one trace CSV per run (the summary is always written).
    pub write_csv: bool,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, HarnessError> {
    load_config_with(path, &LoadOptions::default())
}

pub fn load_config_with(
    path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<ExperimentConfig, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        context: format!("reading config {}", path.display()),
        source,
    })?;
    parse_config(&text, options)
}

/// Parses and validates a JSON config document.
///
/// The document is either a single run object or `{"runs": [...]}` with
/// optional `output_dir`, `seed` and `csv` at the top level.
pub fn parse_config(text: &str, options: &LoadOptions) -> Result<ExperimentConfig, HarnessError> {
    let value: Value = serde_json::from_str(text).map_err(|e| HarnessError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Object(mut map) = value else {
        return Err(HarnessError::validation("", "config must be a JSON object"));
    };

    let single = !map.contains_key("runs");
    let document = if single {
        let mut top = serde_json::Map::new();
        for key in ["output_dir", "csv"] {
            if let Some(v) = map.remove(key) {
                top.insert(key.to_string(), v);
            }
        }
        top.insert("runs".into(), Value::Array(vec![Value::Object(map)]));
        Value::Object(top)
    } else {
        Value::Object(map)
    };

    let raw: RawExperiment = serde_path_to_error::deserialize(document).map_err(|e| {
        let field = e.path().to_string();
        let field = if single {
            field.trim_start_matches("runs[0]").trim_start_matches('.').to_string()
        } else {
            field
        };
        HarnessError::validation(if field == "." { "" } else { &field }, e.inner().to_string())
    })?;

    let seed = options.seed.or(raw.seed).unwrap_or(0);
    let mut runs = Vec::with_capacity(raw.runs.len());
    for (i, run) in raw.runs.iter().enumerate() {
        let prefix = if single { String::new() } else { format!("runs[{i}].") };
        runs.push(resolve_run(i, run, seed, &prefix)?);
    }
    let mut ids: Vec<&str> = runs.iter().map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(HarnessError::validation("id", format!("duplicate run id `{}`", w[0])));
    }

    Ok(ExperimentConfig {
        runs,
        output_dir: options
            .output_dir
            .clone()
            .or(raw.output_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        write_csv: raw.csv.unwrap_or(true),
    })
}

fn used_parameters(algorithm: Algorithm) -> &'static [&'static str] {
    match algorithm {
        Algorithm::Newton => &[],
        Algorithm::GradientDescent => &["gd_step"],
        Algorithm::AlgI => &["r"],
        Algorithm::FiniteHorizonBackward => &["r", "horizon"],
        Algorithm::AlgIIClosed | Algorithm::AlgIIRecursive => &["m"],
        Algorithm::AlgIII | Algorithm::AlgIV => &["d"],
    }
}

fn resolve_run(
    index: usize,
    raw: &RawRun,
    default_seed: u64,
    prefix: &str,
) -> Result<RunSpec, HarnessError> {
    let field = |name: &str| format!("{prefix}{name}");

    let algorithm: Algorithm = raw
        .algorithm
        .parse()
        .map_err(|e: Error| HarnessError::validation(field("algorithm"), e.to_string()))?;
    let seed = raw.seed.unwrap_or(default_seed);
    let problem = problem_by_name(&raw.problem, seed)
        .map_err(|e| HarnessError::validation(field("problem"), e.to_string()))?;
    let n = problem.dim();

    let x0 = match &raw.x0 {
        None => problem.recommended_x0.clone(),
        Some(xs) if xs.len() != n => {
            return Err(HarnessError::validation(
                field("x0"),
                format!("expected {n} entries, found {}", xs.len()),
            ))
        }
        Some(xs) => Vector::from_slice(xs)
            .map_err(|e| HarnessError::validation(field("x0"), e.to_string()))?,
    };

    let mut cfg = default_parameters(&problem.oracle, &x0, algorithm).map_err(|e| {
        HarnessError::validation(field("x0"), format!("default parameters failed: {e}"))
    })?;
    let mut defaulted = Vec::new();

    macro_rules! weight {
        ($slot:ident, $name:literal) => {
            match &raw.$slot {
                Some(spec) => {
                    cfg.$slot = Some(
                        spec.to_weight()
                            .map_err(|e| HarnessError::validation(field($name), e))?,
                    )
                }
                None if cfg.$slot.is_some() => defaulted.push($name.to_string()),
                None => {}
            }
        };
    }
    weight!(r, "r");
    weight!(m, "m");

    match &raw.d {
        Some(d) => {
            cfg.d = Some(
                Vector::from_slice(d).map_err(|e| HarnessError::validation(field("d"), e.to_string()))?,
            )
        }
        None if cfg.d.is_some() => defaulted.push("d".into()),
        None => {}
    }
    match raw.gd_step {
        Some(s) => cfg.gd_step = Some(s),
        None if cfg.gd_step.is_some() => defaulted.push("gd_step".into()),
        None => {}
    }
    match raw.horizon {
        Some(h) => cfg.n_horizon = Some(h),
        None if cfg.n_horizon.is_some() => defaulted.push("horizon".into()),
        None => {}
    }
    cfg.horizon_cap = raw.horizon_cap;
    cfg.inner_mode = raw.inner_mode;
    if let Some(v) = raw.grad_tol {
        cfg.grad_tol = v;
    }
    if let Some(v) = raw.step_tol {
        cfg.step_tol = v;
    }
    if let Some(v) = raw.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = raw.difference_guard {
        cfg.difference_guard = v;
    }

    cfg.validate(n).map_err(|e| match e {
        Error::InvalidParameter { name, reason } => {
            let name = if name == "n_horizon" { "horizon".to_string() } else { name };
            HarnessError::validation(field(&name), reason)
        }
        other => HarnessError::validation(field("algorithm"), other.to_string()),
    })?;

    let id = raw
        .id
        .clone()
        .unwrap_or_else(|| format!("{index:02}-{}-{}", raw.problem, algorithm.name()));
    if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
        return Err(HarnessError::validation(field("id"), "must be a plain file name"));
    }

    Ok(RunSpec {
        id,
        problem,
        x0,
        config: cfg,
        seed,
        defaulted,
    })
}
