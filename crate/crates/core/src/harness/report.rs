use serde::Serialize;

use crate::linalg::{spectral_radius, Vector};
use crate::steppers::{contraction_matrix, Algorithm, StepperConfig, Trace};
use crate::differentiation::ObjectiveOracle;

/// Log-slope magnitude separating linear from superlinear.
pub const SLOPE_THRESHOLD: f64 = 0.05;
/// Required shrinkage of the last valid ratio against the first.
pub const SHRINK_FACTOR: f64 = 0.5;
/// Errors at or below `NOISE_FLOOR_ULPS·ε·(1+|x*|)` are not used in ratios.
pub const NOISE_FLOOR_ULPS: f64 = 100.0;
/// A lone ratio this small means the error vanished to roundoff in one step.
pub const FINITE_TERMINATION_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "rate", rename_all = "kebab-case")]
pub enum RateClass {
    Superlinear,
    Linear(f64),
    Sublinear,
    Inconclusive,
}

impl RateClass {
    pub fn label(&self) -> String {
        match self {
            RateClass::Superlinear => "superlinear".into(),
            RateClass::Linear(r) => format!("linear({r:.4})"),
            RateClass::Sublinear => "sublinear".into(),
            RateClass::Inconclusive => "inconclusive".into(),
        }
    }
}

/// Classification plus the statistics it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub class: RateClass,
    /// Least-squares slope of `ln r_k` against `k`.
    pub slope: Option<f64>,
    pub mean_ratio: Option<f64>,
}

/// Classifies an error-ratio sequence `r_k = e_{k+1}/e_k`.
///
/// * superlinear: log-slope `≤ −0.05` and last ratio `< 0.5·` first;
/// * sublinear: mean ratio `≥ 1 − 1e-6` while the errors still shrink overall;
/// * linear: `|slope| < 0.05` and mean ratio below one;
/// * otherwise, or with fewer than three ratios, inconclusive.
///
/// Zero ratios are clamped to the smallest positive normal before taking logs.
pub fn classify_rate(ratios: &[f64]) -> RateFit {
    if ratios.len() < 3 || ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return RateFit {
            class: RateClass::Inconclusive,
            slope: None,
            mean_ratio: None,
        };
    }
    let n = ratios.len() as f64;
    let logs: Vec<f64> = ratios.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
    let k_mean = (n - 1.0) / 2.0;
    let l_mean = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, l) in logs.iter().enumerate() {
        let dk = k as f64 - k_mean;
        sxy += dk * (l - l_mean);
        sxx += dk * dk;
    }
    let slope = sxy / sxx;
    let mean = ratios.iter().sum::<f64>() / n;
    let first = ratios[0];
    let last = ratios[ratios.len() - 1];
    // product of ratios is e_last / e_first
    let shrinking = logs.iter().sum::<f64>() < 0.0;

    let class = if slope <= -SLOPE_THRESHOLD && last < SHRINK_FACTOR * first {
        RateClass::Superlinear
    } else if mean >= 1.0 - 1e-6 && shrinking {
        RateClass::Sublinear
    } else if slope.abs() < SLOPE_THRESHOLD && mean < 1.0 {
        RateClass::Linear(mean)
    } else {
        RateClass::Inconclusive
    };
    RateFit {
        class,
        slope: Some(slope),
        mean_ratio: Some(mean),
    }
}

/// Error below which ratios are dominated by roundoff.
pub fn noise_floor(reference: &Vector) -> f64 {
    NOISE_FLOOR_ULPS * f64::EPSILON * (1.0 + reference.norm())
}

/// `r_k = e_{k+1}/e_k` for each `k` with `e_k` above `floor`; `None` elsewhere.
pub fn error_ratios(errors: &[f64], floor: f64) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|k| {
            let next = *errors.get(k + 1)?;
            (errors[k] > floor).then(|| next / errors[k])
        })
        .collect()
}

/// Bound on `r_k` implied by `ρ` of the contraction matrix for the step at `k`.
pub fn ratio_bound(cfg: &StepperConfig, rho: f64, k: usize) -> f64 {
    let exponent = match cfg.algorithm {
        Algorithm::Newton => return 0.0,
        Algorithm::GradientDescent => 1,
        Algorithm::FiniteHorizonBackward => cfg.n_horizon.unwrap_or(0).saturating_sub(k) + 1,
        _ => cfg.inner_depth(k) + 1,
    };
    rho.powi(exponent.min(i32::MAX as usize) as i32)
}

/// Where the errors of a run are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorReference {
    KnownMinimizer,
    /// `|x_k − x_final|`; ratios then understate the true error near the end.
    FinalIterate,
}

/// Per-iterate error analysis of one trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateAnalysis {
    pub reference: ErrorReference,
    pub errors: Vec<f64>,
    pub ratios: Vec<Option<f64>>,
    /// `ρ` of the contraction matrix, evaluated at `x*` or at `x0`.
    pub rho: Option<f64>,
    pub rho_at: &'static str,
    pub bounds: Vec<Option<f64>>,
    pub fit: RateFit,
    /// The fit had too few ratios but the error dropped to roundoff in one step.
    pub finite_termination: bool,
}

impl RateAnalysis {
    pub fn class(&self) -> RateClass {
        self.fit.class
    }
}

pub fn analyze_trace(
    oracle: &ObjectiveOracle,
    cfg: &StepperConfig,
    x0: &Vector,
    trace: &Trace,
) -> RateAnalysis {
    let (reference, target) = match oracle.known_minimizer() {
        Some(xs) => (ErrorReference::KnownMinimizer, xs.clone()),
        None => (
            ErrorReference::FinalIterate,
            trace.final_point().cloned().unwrap_or_else(|| x0.clone()),
        ),
    };
    let errors: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.x.sub(&target).map(|d| d.norm()).unwrap_or(f64::NAN))
        .collect();
    let floor = noise_floor(&target);
    let ratios = error_ratios(&errors, floor);

    let (rho_point, rho_at) = match oracle.known_minimizer() {
        Some(xs) => (xs, "x*"),
        None => (x0, "x0"),
    };
    let rho = contraction_matrix(oracle, rho_point, cfg)
        .and_then(|a| spectral_radius(&a))
        .ok();
    let bounds = (0..errors.len())
        .map(|k| {
            let has_step = trace.records[k].step.is_some();
            rho.filter(|_| has_step).map(|r| ratio_bound(cfg, r, k))
        })
        .collect();

    let valid: Vec<f64> = ratios.iter().flatten().copied().collect();
    let mut fit = classify_rate(&valid);
    let reached_floor = errors.last().is_some_and(|e| *e <= floor);
    let finite_termination = valid.len() < 3
        && reached_floor
        && valid.last().is_some_and(|r| *r <= FINITE_TERMINATION_RATIO);
    if finite_termination {
        fit.class = RateClass::Superlinear;
    }

    RateAnalysis {
        reference,
        errors,
        ratios,
        rho,
        rho_at,
        bounds,
        fit,
        finite_termination,
    }
}
