//! Iteration maps `x_{k+1} = x_k − step_k` and the outer run loop.
//!
//! Every optimal-control-derived stepper computes a step of the form
//! `[I − A^{m+1}]·H⁻¹∇f` for some contraction matrix `A`, where `m = k` at
//! outer iteration `k` (optionally capped). How that step is realized is
//! what distinguishes them:
//!
//! | algorithm            | contraction `A`      | realization                            |
//! |----------------------|----------------------|----------------------------------------|
//! | `FiniteHorizonBackward` | `(R+H)⁻¹R`        | series with `N−k+1` terms              |
//! | `AlgI`               | `(R+H)⁻¹R`           | series `Σ Aⁱ (R+H)⁻¹∇f`, solves only   |
//! | `AlgIIClosed`        | `I − M H`            | matrix power and an `H` solve          |
//! | `AlgIIRecursive`     | `I − M H`            | `g ← M∇f + (I−MH) g`, no solves        |
//! | `AlgIII`             | `I − D D₁`           | same recursion with a secant `D₁`      |
//! | `AlgIV`              | `I − D Λ`            | elementwise recursion on `diag(H)`     |
//!
//! With `m` uncapped the error contracts by `ρ(A)^{k+1}` per step, so the
//! rate is superlinear. A `horizon_cap` bounds the inner work per step and
//! degrades the rate to linear with factor `ρ(A)^{cap}`.

mod params;
mod run;
mod steps;

pub use params::{default_parameters, parameter_warnings, DEFAULT_THETA, MAX_GAIN, MIN_CURVATURE};
pub use run::{run, run_unchecked, RunOutcome, StopReason, Trace, TraceRecord};
pub use steps::{
    alg1_closed_step, alg1_step, alg2_closed_step, alg2_recursive_step, alg3_step, alg4_step,
    contraction_matrix, finite_horizon_step, gd_step, newton_step, SecantState, StepOutput,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::differentiation::DEFAULT_DIFFERENCE_GUARD;
use crate::error::{Error, Result};
use crate::linalg::{is_symmetric_pd, DenseMatrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    GradientDescent,
    Newton,
    FiniteHorizonBackward,
    AlgI,
    AlgIIClosed,
    AlgIIRecursive,
    AlgIII,
    AlgIV,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::GradientDescent,
        Algorithm::Newton,
        Algorithm::FiniteHorizonBackward,
        Algorithm::AlgI,
        Algorithm::AlgIIClosed,
        Algorithm::AlgIIRecursive,
        Algorithm::AlgIII,
        Algorithm::AlgIV,
    ];

    /// Kebab-case name used by the CLI and config files.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GradientDescent => "gradient-descent",
            Algorithm::Newton => "newton",
            Algorithm::FiniteHorizonBackward => "finite-horizon",
            Algorithm::AlgI => "alg1",
            Algorithm::AlgIIClosed => "alg2-closed",
            Algorithm::AlgIIRecursive => "alg2-recursive",
            Algorithm::AlgIII => "alg3",
            Algorithm::AlgIV => "alg4",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Algorithm::GradientDescent => "fixed-step gradient descent baseline",
            Algorithm::Newton => "pure Newton step H⁻¹∇f",
            Algorithm::FiniteHorizonBackward => "horizon-N backward iteration, exponent N−k+1",
            Algorithm::AlgI => "control-weighted Newton, [I−((R+H)⁻¹R)^{k+1}]H⁻¹∇f",
            Algorithm::AlgIIClosed => "[I−(I−MH)^{k+1}]H⁻¹∇f via matrix power (needs H⁻¹)",
            Algorithm::AlgIIRecursive => "g ← M∇f + (I−MH)g unrolled k times, no solves",
            Algorithm::AlgIII => "recursion with backward-difference secant D₁ (Hessian-free)",
            Algorithm::AlgIV => "elementwise recursion on the Hessian diagonal Λ",
        }
    }

    fn needs_r(self) -> bool {
        matches!(self, Algorithm::AlgI | Algorithm::FiniteHorizonBackward)
    }

    fn needs_m(self) -> bool {
        matches!(self, Algorithm::AlgIIClosed | Algorithm::AlgIIRecursive)
    }

    fn needs_d(self) -> bool {
        matches!(self, Algorithm::AlgIII | Algorithm::AlgIV)
    }

    /// Whether the inner recursion depth grows with `k`.
    fn has_inner_recursion(self) -> bool {
        matches!(
            self,
            Algorithm::AlgI
                | Algorithm::AlgIIClosed
                | Algorithm::AlgIIRecursive
                | Algorithm::AlgIII
                | Algorithm::AlgIV
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid("algorithm", format!("unknown algorithm `{s}`")))
    }
}

/// How the inner recursion of AlgIII/AlgIV treats `g_{k−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerMode {
    /// Unroll `m` inner steps at the current point starting from `D∇f`.
    Unrolled,
    /// One inner step seeded with the previous outer direction.
    Streaming,
}

/// A positive-definite weight given either as `s·I` or as a full matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Scalar(f64),
    Matrix(DenseMatrix),
}

impl Weight {
    pub fn to_matrix(&self, n: usize) -> Result<DenseMatrix> {
        match self {
            Weight::Scalar(s) => Ok(DenseMatrix::scalar_identity(n, *s)),
            Weight::Matrix(m) if m.rows() == n && m.cols() == n => Ok(m.clone()),
            Weight::Matrix(m) => Err(Error::shape(
                "weight",
                format!("{n}x{n}"),
                format!("{}x{}", m.rows(), m.cols()),
            )),
        }
    }

    fn check_pd(&self, name: &str, n: usize) -> Result<()> {
        let ok = match self {
            Weight::Scalar(s) => *s > 0.0 && s.is_finite(),
            Weight::Matrix(m) => m.rows() == n && is_symmetric_pd(m, 1e-12),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(name, "must be symmetric positive definite"))
        }
    }
}

/// Algorithm choice plus every parameter a run uses.
#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub algorithm: Algorithm,
    /// Control weight for AlgI and the finite-horizon iteration.
    pub r: Option<Weight>,
    /// Preconditioner for AlgII.
    pub m: Option<Weight>,
    /// Diagonal gain for AlgIII/AlgIV.
    pub d: Option<Vector>,
    pub gd_step: Option<f64>,
    pub n_horizon: Option<usize>,
    /// Caps the inner depth at `horizon_cap − 1` extra terms.
    pub horizon_cap: Option<usize>,
    pub grad_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    /// `None` resolves through [`StepperConfig::effective_inner_mode`].
    pub inner_mode: Option<InnerMode>,
    pub difference_guard: f64,
}

impl StepperConfig {
    pub const DEFAULT_GRAD_TOL: f64 = 1e-10;
    pub const DEFAULT_STEP_TOL: f64 = 1e-14;
    pub const DEFAULT_MAX_ITER: usize = 500;

    /// Bare config with default tolerances and no algorithm parameters.
    pub fn new(algorithm: Algorithm) -> Self {
        StepperConfig {
            algorithm,
            r: None,
            m: None,
            d: None,
            gd_step: None,
            n_horizon: None,
            horizon_cap: None,
            grad_tol: Self::DEFAULT_GRAD_TOL,
            step_tol: Self::DEFAULT_STEP_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            inner_mode: None,
            difference_guard: DEFAULT_DIFFERENCE_GUARD,
        }
    }

    pub fn with_r(mut self, r: Weight) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_m(mut self, m: Weight) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_d(mut self, d: Vector) -> Self {
        self.d = Some(d);
        self
    }

    pub fn with_gd_step(mut self, step: f64) -> Self {
        self.gd_step = Some(step);
        self
    }

    pub fn with_horizon(mut self, n: usize) -> Self {
        self.n_horizon = Some(n);
        self
    }

    pub fn with_horizon_cap(mut self, cap: usize) -> Self {
        self.horizon_cap = Some(cap);
        self
    }

    pub fn with_inner_mode(mut self, mode: InnerMode) -> Self {
        self.inner_mode = Some(mode);
        self
    }

    pub fn with_tolerances(mut self, grad_tol: f64, step_tol: f64, max_iter: usize) -> Self {
        self.grad_tol = grad_tol;
        self.step_tol = step_tol;
        self.max_iter = max_iter;
        self
    }

    /// AlgIII defaults to streaming: its secant `D₁` is rank one on the moved
    /// coordinates, so `I − D D₁` keeps `n−1` unit eigenvalues and an
    /// unrolled sum grows linearly in `k` along them.
    pub fn effective_inner_mode(&self) -> InnerMode {
        self.inner_mode.unwrap_or(match self.algorithm {
            Algorithm::AlgIII => InnerMode::Streaming,
            _ => InnerMode::Unrolled,
        })
    }

    /// Inner depth `m = min(k, cap − 1)`; the step uses `m + 1` terms.
    pub fn inner_depth(&self, k: usize) -> usize {
        match self.horizon_cap {
            Some(cap) => k.min(cap.saturating_sub(1)),
            None => k,
        }
    }

    /// Checks that exactly the parameters the algorithm needs are present and valid.
    pub fn validate(&self, n: usize) -> Result<()> {
        let alg = self.algorithm;
        check_presence("r", self.r.is_some(), alg.needs_r(), alg)?;
        check_presence("m", self.m.is_some(), alg.needs_m(), alg)?;
        check_presence("d", self.d.is_some(), alg.needs_d(), alg)?;
        check_presence(
            "gd_step",
            self.gd_step.is_some(),
            alg == Algorithm::GradientDescent,
            alg,
        )?;
        check_presence(
            "n_horizon",
            self.n_horizon.is_some(),
            alg == Algorithm::FiniteHorizonBackward,
            alg,
        )?;
        if self.horizon_cap.is_some() && !alg.has_inner_recursion() {
            return Err(Error::invalid(
                "horizon_cap",
                format!("not used by {alg}"),
            ));
        }
        if self.inner_mode.is_some() && !alg.needs_d() {
            return Err(Error::invalid("inner_mode", format!("not used by {alg}")));
        }

        if let Some(r) = &self.r {
            r.check_pd("r", n)?;
        }
        if let Some(m) = &self.m {
            m.check_pd("m", n)?;
        }
        if let Some(d) = &self.d {
            if d.dim() != n {
                return Err(Error::invalid("d", format!("expected {n} entries, found {}", d.dim())));
            }
            if d.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::invalid("d", "entries must be positive"));
            }
        }
        if let Some(step) = self.gd_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::invalid("gd_step", "must be positive"));
            }
        }
        if self.horizon_cap == Some(0) {
            return Err(Error::invalid("horizon_cap", "must be at least 1"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid("grad_tol", "must be positive"));
        }
        if !(self.step_tol > 0.0) {
            return Err(Error::invalid("step_tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be positive"));
        }
        if !(self.difference_guard > 0.0) {
            return Err(Error::invalid("difference_guard", "must be positive"));
        }
        Ok(())
    }
}

fn check_presence(name: &str, present: bool, needed: bool, alg: Algorithm) -> Result<()> {
    match (present, needed) {
        (true, false) => Err(Error::invalid(name, format!("not used by {alg}"))),
        (false, true) => Err(Error::invalid(name, format!("required by {alg}"))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("bfgs".parse::<Algorithm>().is_err());
    }

    #[test]
    fn validation_requires_exact_parameters() {
        let cfg = StepperConfig::new(Algorithm::AlgI);
        assert!(cfg.validate(2).is_err());
        let cfg = cfg.with_r(Weight::Scalar(1.0));
        assert!(cfg.validate(2).is_ok());
        let cfg = cfg.with_m(Weight::Scalar(1.0));
        assert!(matches!(
            cfg.validate(2),
            Err(Error::InvalidParameter { name, .. }) if name == "m"
        ));
    }

    #[test]
    fn validation_rejects_non_pd_weights() {
        let cfg = StepperConfig::new(Algorithm::AlgI).with_r(Weight::Scalar(-1.0));
        assert!(cfg.validate(1).is_err());
        let indefinite = DenseMatrix::diag(&[1.0, -1.0]);
        let cfg = StepperConfig::new(Algorithm::AlgIIRecursive).with_m(Weight::Matrix(indefinite));
        assert!(cfg.validate(2).is_err());
        let cfg = StepperConfig::new(Algorithm::AlgIV)
            .with_d(Vector::from_slice(&[0.5, 0.0]).unwrap());
        assert!(cfg.validate(2).is_err());
    }

    #[test]
    fn inner_depth_respects_cap() {
        let cfg = StepperConfig::new(Algorithm::AlgIIRecursive).with_horizon_cap(3);
        assert_eq!(cfg.inner_depth(0), 0);
        assert_eq!(cfg.inner_depth(2), 2);
        assert_eq!(cfg.inner_depth(10), 2);
        assert_eq!(StepperConfig::new(Algorithm::AlgI).inner_depth(10), 10);
    }

    #[test]
    fn inner_mode_defaults() {
        assert_eq!(
            StepperConfig::new(Algorithm::AlgIII).effective_inner_mode(),
            InnerMode::Streaming
        );
        assert_eq!(
            StepperConfig::new(Algorithm::AlgIV).effective_inner_mode(),
            InnerMode::Unrolled
        );
    }
}
