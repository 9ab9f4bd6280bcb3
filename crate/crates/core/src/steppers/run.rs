use serde::Serialize;

use crate::differentiation::ObjectiveOracle;
use crate::error::{Error, Result};
use crate::linalg::Vector;

use super::steps::{
    alg1_step, alg2_closed_step, alg2_recursive_step, alg3_step, alg4_step, finite_horizon_step,
    gd_step, newton_step, SecantState,
};
use super::{Algorithm, StepperConfig};

/// One iterate of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    pub x: Vector,
    pub f: f64,
    pub grad_norm: f64,
    /// `x_{k+1} = x_k − step`; absent on the final record.
    pub step: Option<Vector>,
    /// `|x_k − x*|` when the minimizer is known.
    pub err_norm: Option<f64>,
    /// `f(x_k) − f(x*)` when the minimizer is known.
    pub lyapunov: Option<f64>,
    pub guarded_columns: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.iter().filter(|r| r.step.is_some()).count()
    }

    pub fn final_point(&self) -> Option<&Vector> {
        self.last().map(|r| &r.x)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.f)
    }

    pub fn errors(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.err_norm).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    /// The finite-horizon iteration used its last step `k = N`.
    HorizonReached,
    NumericalFailure(Error),
}

impl StopReason {
    /// Stopped by one of the convergence tests (or a completed horizon).
    pub fn is_converged(&self) -> bool {
        matches!(
            self,
            StopReason::GradientTolerance | StopReason::StepTolerance | StopReason::HorizonReached
        )
    }

    pub fn label(&self) -> String {
        match self {
            StopReason::GradientTolerance => "gradient-tolerance".into(),
            StopReason::StepTolerance => "step-tolerance".into(),
            StopReason::MaxIterations => "max-iterations".into(),
            StopReason::HorizonReached => "horizon-reached".into(),
            StopReason::NumericalFailure(e) => format!("numerical-failure: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: Trace,
    pub stop: StopReason,
}

/// Iterates `x_{k+1} = x_k − step_k` from `x0`.
///
/// Stops on `|∇f| ≤ grad_tol`, `|step| ≤ step_tol`, `k = max_iter`, or
/// after step `k = N` of the finite-horizon iteration. A stepper error ends
/// the run with [`StopReason::NumericalFailure`] and keeps the partial trace.
/// Invalid configurations are rejected up front.
pub fn run(oracle: &ObjectiveOracle, x0: &Vector, cfg: &StepperConfig) -> Result<RunOutcome> {
    cfg.validate(oracle.dim())?;
    run_unchecked(oracle, x0, cfg)
}

/// [`run`] without parameter validation, for probing degenerate limits such
/// as `R = 0`.
pub fn run_unchecked(
    oracle: &ObjectiveOracle,
    x0: &Vector,
    cfg: &StepperConfig,
) -> Result<RunOutcome> {
    if x0.dim() != oracle.dim() {
        return Err(Error::shape("run", oracle.dim(), x0.dim()));
    }
    let minimizer = oracle.known_minimizer();
    let f_star = minimizer.map(|xs| oracle.value(xs)).transpose()?;

    let mut trace = Trace::default();
    let mut state = SecantState::default();
    let mut x = x0.clone();
    let mut k = 0usize;

    let stop = loop {
        let mut record = match evaluate(oracle, &x, k, minimizer, f_star) {
            Ok(r) => r,
            Err(e) => break StopReason::NumericalFailure(e),
        };
        if record.grad_norm <= cfg.grad_tol {
            trace.records.push(record);
            break StopReason::GradientTolerance;
        }
        if k >= cfg.max_iter {
            trace.records.push(record);
            break StopReason::MaxIterations;
        }
        if cfg.algorithm == Algorithm::FiniteHorizonBackward
            && cfg.n_horizon.is_some_and(|n| k > n)
        {
            trace.records.push(record);
            break StopReason::HorizonReached;
        }

        let step = match take_step(oracle, &mut state, &x, k, cfg) {
            Ok((step, guarded)) => {
                record.guarded_columns = guarded;
                step
            }
            Err(e) => {
                trace.records.push(record);
                break StopReason::NumericalFailure(e);
            }
        };
        if let Err(e) = step.ensure_finite("step") {
            trace.records.push(record);
            break StopReason::NumericalFailure(e);
        }
        let next = x.sub(&step)?;
        let small = step.norm() <= cfg.step_tol;
        record.step = Some(step);
        trace.records.push(record);
        x = next;
        k += 1;

        if small {
            match evaluate(oracle, &x, k, minimizer, f_star) {
                Ok(r) => {
                    trace.records.push(r);
                    break StopReason::StepTolerance;
                }
                Err(e) => break StopReason::NumericalFailure(e),
            }
        }
    };

    Ok(RunOutcome { trace, stop })
}

fn evaluate(
    oracle: &ObjectiveOracle,
    x: &Vector,
    k: usize,
    minimizer: Option<&Vector>,
    f_star: Option<f64>,
) -> Result<TraceRecord> {
    x.ensure_finite("iterate")?;
    let f = oracle.value(x)?;
    let grad_norm = oracle.gradient(x)?.norm();
    let err_norm = minimizer.map(|xs| x.sub(xs).map(|d| d.norm())).transpose()?;
    Ok(TraceRecord {
        k,
        x: x.clone(),
        f,
        grad_norm,
        step: None,
        err_norm,
        lyapunov: f_star.map(|fs| f - fs),
        guarded_columns: None,
    })
}

fn take_step(
    oracle: &ObjectiveOracle,
    state: &mut SecantState,
    x: &Vector,
    k: usize,
    cfg: &StepperConfig,
) -> Result<(Vector, Option<Vec<usize>>)> {
    let plain = |step: Result<Vector>| step.map(|s| (s, None));
    match cfg.algorithm {
        Algorithm::GradientDescent => plain(gd_step(oracle, x, cfg)),
        Algorithm::Newton => plain(newton_step(oracle, x)),
        Algorithm::FiniteHorizonBackward => plain(finite_horizon_step(oracle, x, k, cfg)),
        Algorithm::AlgI => plain(alg1_step(oracle, x, k, cfg)),
        Algorithm::AlgIIClosed => plain(alg2_closed_step(oracle, x, k, cfg)),
        Algorithm::AlgIIRecursive => plain(alg2_recursive_step(oracle, x, k, cfg)),
        Algorithm::AlgIII => {
            let out = alg3_step(oracle, state, x, k, cfg)?;
            *state = out.state;
            Ok((out.step, out.guarded_columns))
        }
        Algorithm::AlgIV => {
            let out = alg4_step(oracle, state, x, k, cfg)?;
            *state = out.state;
            Ok((out.step, None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::steppers::Weight;

    fn half_square() -> ObjectiveOracle {
        ObjectiveOracle::new(1, |x| 0.5 * x[0] * x[0], |x| x.clone())
            .with_hessian(|_| DenseMatrix::identity(1))
            .with_known_minimizer(Vector::zeros(1))
    }

    fn x0() -> Vector {
        Vector::from_slice(&[1.0]).unwrap()
    }

    #[test]
    fn alg1_scalar_errors_follow_exact_factors() {
        let cfg = StepperConfig::new(Algorithm::AlgI).with_r(Weight::Scalar(1.0));
        let out = run(&half_square(), &x0(), &cfg).unwrap();
        assert_eq!(out.stop, StopReason::GradientTolerance);
        let errs = out.trace.errors().unwrap();
        assert_eq!(&errs[..4], &[1.0, 0.5, 0.125, 0.015625]);
        for k in 0..errs.len() - 1 {
            if errs[k] == 0.0 {
                break;
            }
            assert_eq!(errs[k + 1] / errs[k], 0.5f64.powi(k as i32 + 1));
        }
    }

    #[test]
    fn newton_converges_in_one_step() {
        let out = run(&half_square(), &x0(), &StepperConfig::new(Algorithm::Newton)).unwrap();
        assert_eq!(out.trace.iterations(), 1);
        assert_eq!(out.stop, StopReason::GradientTolerance);
    }

    #[test]
    fn gradient_descent_is_linear() {
        let cfg = StepperConfig::new(Algorithm::GradientDescent)
            .with_gd_step(0.1)
            .with_tolerances(1e-10, 1e-14, 50);
        let out = run(&half_square(), &x0(), &cfg).unwrap();
        assert_eq!(out.stop, StopReason::MaxIterations);
        let errs = out.trace.errors().unwrap();
        for w in errs.windows(2) {
            assert!((w[1] / w[0] - 0.9).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_horizon_stops_after_last_step() {
        let cfg = StepperConfig::new(Algorithm::FiniteHorizonBackward)
            .with_r(Weight::Scalar(100.0))
            .with_horizon(3);
        let out = run(&half_square(), &x0(), &cfg).unwrap();
        assert_eq!(out.stop, StopReason::HorizonReached);
        assert_eq!(out.trace.iterations(), 4);
    }

    #[test]
    fn failures_keep_partial_trace() {
        let quartic = ObjectiveOracle::new(
            2,
            |x| 0.25 * x[0].powi(4) + x[0] + x[1] * x[1],
            |x| Vector::raw(vec![x[0].powi(3) + 1.0, 2.0 * x[1]]),
        )
        .with_hessian(|x| DenseMatrix::diag(&[3.0 * x[0] * x[0], 2.0]));
        let out = run(
            &quartic,
            &Vector::from_slice(&[0.0, 1.0]).unwrap(),
            &StepperConfig::new(Algorithm::Newton),
        )
        .unwrap();
        assert!(matches!(
            out.stop,
            StopReason::NumericalFailure(Error::SingularMatrix { .. })
        ));
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn trace_reconstructs_iterates() {
        let cfg = StepperConfig::new(Algorithm::AlgIIRecursive).with_m(Weight::Scalar(0.3));
        let out = run(&half_square(), &x0(), &cfg).unwrap();
        for w in out.trace.records.windows(2) {
            let step = w[0].step.as_ref().unwrap();
            assert_eq!(w[0].x.sub(step).unwrap(), w[1].x);
            assert_eq!(w[1].k, w[0].k + 1);
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = StepperConfig::new(Algorithm::AlgI);
        assert!(run(&half_square(), &x0(), &cfg).is_err());
    }
}
