use crate::differentiation::{hessian_diagonal_relative, ObjectiveOracle};
use crate::error::Result;
use crate::linalg::{spectral_radius, Vector};

use super::steps::contraction_matrix;
use super::{Algorithm, StepperConfig, Weight};

/// Fraction of the inverse curvature used for each diagonal gain `dᵢ`.
pub const DEFAULT_THETA: f64 = 0.5;
/// Curvature floor below which a coordinate counts as flat.
pub const MIN_CURVATURE: f64 = 1e-8;
/// Upper bound on any scalar gain (`1/λ̂`, `dᵢ`, gradient step).
pub const MAX_GAIN: f64 = 1e4;
/// Horizon used by the finite-horizon iteration when none is given.
pub const DEFAULT_HORIZON: usize = 50;

/// Parameter rule evaluated at the starting point.
///
/// With `λ̂ = max(ρ(H(x0)), 1e-8)`:
/// * `M = min(1/λ̂, 1e4)·I`, `R = λ̂·I`, gradient step `min(1/λ̂, 1e4)`;
/// * `dᵢ = θ/Λᵢ(x0)` with `θ = 0.5`. A coordinate with `Λᵢ ≤ 1e-8` carries
///   no curvature information and takes `θ/max_j Λⱼ(x0)` instead (or
///   `θ/1e-8` when every `Λⱼ` is flat), capped at `1e4`.
///
/// Only the parameters the algorithm uses are filled in. The convergence
/// conditions are stated at the unknown minimizer, so they are not enforced
/// here; see [`parameter_warnings`].
pub fn default_parameters(
    oracle: &ObjectiveOracle,
    x0: &Vector,
    algorithm: Algorithm,
) -> Result<StepperConfig> {
    let mut cfg = StepperConfig::new(algorithm);
    match algorithm {
        Algorithm::Newton => {}
        Algorithm::GradientDescent => {
            cfg.gd_step = Some((1.0 / curvature_scale(oracle, x0)?).min(MAX_GAIN));
        }
        Algorithm::AlgI => {
            cfg.r = Some(Weight::Scalar(curvature_scale(oracle, x0)?));
        }
        Algorithm::FiniteHorizonBackward => {
            cfg.r = Some(Weight::Scalar(curvature_scale(oracle, x0)?));
            cfg.n_horizon = Some(DEFAULT_HORIZON);
        }
        Algorithm::AlgIIClosed | Algorithm::AlgIIRecursive => {
            let gain = (1.0 / curvature_scale(oracle, x0)?).min(MAX_GAIN);
            cfg.m = Some(Weight::Scalar(gain));
        }
        Algorithm::AlgIII | Algorithm::AlgIV => {
            cfg.d = Some(diagonal_gains(&hessian_diagonal_relative(oracle, x0)?));
        }
    }
    Ok(cfg)
}

/// `λ̂ = max(ρ(H(x0)), 1e-8)`.
fn curvature_scale(oracle: &ObjectiveOracle, x0: &Vector) -> Result<f64> {
    let rho = spectral_radius(&oracle.hessian(x0)?)?;
    Ok(rho.max(MIN_CURVATURE))
}

fn diagonal_gains(lambda: &Vector) -> Vector {
    let largest = lambda.iter().fold(0.0f64, |m, &l| m.max(l));
    let fallback = largest.max(MIN_CURVATURE);
    Vector::raw(
        lambda
            .iter()
            .map(|&l| {
                let scale = if l > MIN_CURVATURE { l } else { fallback };
                (DEFAULT_THETA / scale).min(MAX_GAIN)
            })
            .collect(),
    )
}

/// Human-readable warnings when `ρ` of the contraction matrix at `x0` is
/// not below one. An empty list means the local condition holds at `x0`.
pub fn parameter_warnings(
    oracle: &ObjectiveOracle,
    x0: &Vector,
    cfg: &StepperConfig,
) -> Result<Vec<String>> {
    if cfg.algorithm == Algorithm::Newton {
        return Ok(Vec::new());
    }
    let rho = match contraction_matrix(oracle, x0, cfg).and_then(|a| spectral_radius(&a)) {
        Ok(rho) => rho,
        Err(e) => return Ok(vec![format!("contraction at x0 not evaluable: {e}")]),
    };
    if rho < 1.0 {
        Ok(Vec::new())
    } else {
        Ok(vec![format!(
            "spectral radius of the {} contraction matrix at x0 is {rho:.6} (>= 1)",
            cfg.algorithm
        )])
    }
}
