use crate::differentiation::{
    backward_difference_jacobian, hessian_diagonal_relative, DifferencePair, ObjectiveOracle,
};
use crate::error::{Error, Result};
use crate::linalg::{
    geometric_sum_from, matrix_power, DenseMatrix, LuFactors, Vector,
};

use super::{Algorithm, InnerMode, StepperConfig};

fn require<'a, T>(value: &'a Option<T>, name: &'static str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Error::invalid(name, "missing"))
}

fn exponent(m: usize) -> Result<u32> {
    u32::try_from(m + 1).map_err(|_| Error::invalid("k", "exponent overflow"))
}

/// `gd_step · ∇f(x)`.
pub fn gd_step(oracle: &ObjectiveOracle, x: &Vector, cfg: &StepperConfig) -> Result<Vector> {
    let step = *require(&cfg.gd_step, "gd_step")?;
    Ok(oracle.gradient(x)?.scale(step))
}

/// Solution `d` of `H(x) d = ∇f(x)`.
pub fn newton_step(oracle: &ObjectiveOracle, x: &Vector) -> Result<Vector> {
    let h = oracle.hessian(x)?;
    let g = oracle.gradient(x)?;
    LuFactors::factor(&h)?.solve_vec(&g)
}

/// `Σ_{i=0}^{m} [(R+H)⁻¹R]ⁱ (R+H)⁻¹ ∇f` with one factorization of `R+H`.
fn control_weighted_series(
    oracle: &ObjectiveOracle,
    x: &Vector,
    r: &DenseMatrix,
    m: usize,
) -> Result<Vector> {
    let h = oracle.hessian(x)?;
    let g = oracle.gradient(x)?;
    let lu = LuFactors::factor(&r.add(&h)?)?;
    let first = lu.solve_vec(&g)?;
    geometric_sum_from(|t| lu.solve_vec(&r.matvec(t)?), first, m)
}

/// Algorithm I step, `[I − ((R+H)⁻¹R)^{m+1}] H⁻¹ ∇f` with `m = min(k, cap−1)`,
/// evaluated as the equivalent geometric series so `H` itself is never inverted.
pub fn alg1_step(
    oracle: &ObjectiveOracle,
    x: &Vector,
    k: usize,
    cfg: &StepperConfig,
) -> Result<Vector> {
    let r = require(&cfg.r, "r")?.to_matrix(oracle.dim())?;
    control_weighted_series(oracle, x, &r, cfg.inner_depth(k))
}

/// Closed form of the Algorithm I step. Needs a nonsingular `H`; kept as a
/// cross-check of [`alg1_step`].
pub fn alg1_closed_step(
    oracle: &ObjectiveOracle,
    x: &Vector,
    k: usize,
    cfg: &StepperConfig,
) -> Result<Vector> {
    let r = require(&cfg.r, "r")?.to_matrix(oracle.dim())?;
    let h = oracle.hessian(x)?;
    let g = oracle.gradient(x)?;
    let contraction = LuFactors::factor(&r.add(&h)?)?.solve(&r)?;
    closed_form(&contraction, &h, &g, cfg.inner_depth(k))
}

/// `[I − A^{m+1}] H⁻¹ g`.
fn closed_form(a: &DenseMatrix, h: &DenseMatrix, g: &Vector, m: usize) -> Result<Vector> {
    let newton = LuFactors::factor(h)?.solve_vec(g)?;
    let power = matrix_power(a, exponent(m)?)?;
    newton.sub(&power.matvec(&newton)?)
}

/// Finite-horizon backward iteration: the Algorithm I series with
/// `N − k + 1` terms.
pub fn finite_horizon_step(
    oracle: &ObjectiveOracle,
    x: &Vector,
    k: usize,
    cfg: &StepperConfig,
) -> Result<Vector> {
    let horizon = *require(&cfg.n_horizon, "n_horizon")?;
    if k > horizon {
        return Err(Error::HorizonExceeded { k, horizon });
    }
    let r = require(&cfg.r, "r")?.to_matrix(oracle.dim())?;
    control_weighted_series(oracle, x, &r, horizon - k)
}

/// Algorithm II closed form `[I − (I − M H)^{m+1}] H⁻¹∇f`.
pub fn alg2_closed_step(
    oracle: &ObjectiveOracle,
    x: &Vector,
    k: usize,
    cfg: &StepperConfig,
) -> Result<Vector> {
    let n = oracle.dim();
    let m = require(&cfg.m, "m")?.to_matrix(n)?;
    let h = oracle.hessian(x)?;
    let g = oracle.gradient(x)?;
    let contraction = DenseMatrix::identity(n).sub(&m.matmul(&h)?)?;
    closed_form(&contraction, &h, &g, cfg.inner_depth(k))
}

/// `g ← b + T g` repeated `m` times from `g = b`.
fn unroll(b: &Vector, t: &DenseMatrix, m: usize) -> Result<Vector> {
    let mut g = b.clone();
    for _ in 0..m {
        g = b.add(&t.matvec(&g)?)?;
    }
    Ok(g)
}

/// Algorithm II by its recursive realization
/// `ĝ ← M∇f + (I − M H) ĝ`, `ĝ₀ = M∇f`. Never solves with `H`, so a
/// singular or zero Hessian is fine.
pub fn alg2_recursive_step(
    oracle: &ObjectiveOracle,
    x: &Vector,
    k: usize,
    cfg: &StepperConfig,
) -> Result<Vector> {
    let n = oracle.dim();
    let m = require(&cfg.m, "m")?.to_matrix(n)?;
    let h = oracle.hessian(x)?;
    let g = oracle.gradient(x)?;
    let base = m.matvec(&g)?;
    let transfer = DenseMatrix::identity(n).sub(&m.matmul(&h)?)?;
    let step = unroll(&base, &transfer, cfg.inner_depth(k))?;
    step.ensure_finite("alg2 recursive step")?;
    Ok(step)
}

/// State threaded between outer iterations by AlgIII (and by AlgIV in
/// streaming mode).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SecantState {
    /// `(x_{k−1}, ∇f(x_{k−1}))`.
    pub previous: Option<(Vector, Vector)>,
    /// Previous outer direction `g_{k−1}`.
    pub previous_step: Option<Vector>,
}

/// A step plus the bookkeeping a stateful stepper hands back.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub step: Vector,
    pub state: SecantState,
    /// Columns of `D₁` replaced by identity columns (AlgIII only).
    pub guarded_columns: Option<Vec<usize>>,
}

/// Algorithm III: the recursion `ḡ ← D∇f + (I − D D₁) ḡ` with the
/// backward-difference secant `D₁(x_k)` in place of the Hessian.
///
/// `D₁ := I` when no previous iterate exists or every coordinate stalled.
pub fn alg3_step(
    oracle: &ObjectiveOracle,
    state: &SecantState,
    x: &Vector,
    k: usize,
    cfg: &StepperConfig,
) -> Result<StepOutput> {
    let n = oracle.dim();
    let d = require(&cfg.d, "d")?;
    let g = oracle.gradient(x)?;

    let (secant, guarded) = match &state.previous {
        None => (DenseMatrix::identity(n), Vec::new()),
        Some((x_prev, grad_prev)) => {
            let pair = DifferencePair {
                x_prev: x_prev.clone(),
                grad_prev: grad_prev.clone(),
                x_curr: x.clone(),
                grad_curr: g.clone(),
            };
            match backward_difference_jacobian(&pair, cfg.difference_guard) {
                Ok(bd) => (bd.matrix, bd.guarded_columns),
                Err(Error::AllColumnsDegenerate) => (DenseMatrix::identity(n), (0..n).collect()),
                Err(e) => return Err(e),
            }
        }
    };

    let base = g.hadamard(d)?;
    let transfer = DenseMatrix::identity(n).sub(&secant.scale_rows(d)?)?;
    let step = match cfg.effective_inner_mode() {
        InnerMode::Unrolled => unroll(&base, &transfer, cfg.inner_depth(k))?,
        InnerMode::Streaming => match &state.previous_step {
            Some(prev) if k > 0 => base.add(&transfer.matvec(prev)?)?,
            _ => base,
        },
    };
    step.ensure_finite("alg3 step")?;

    Ok(StepOutput {
        state: SecantState {
            previous: Some((x.clone(), g)),
            previous_step: Some(step.clone()),
        },
        step,
        guarded_columns: Some(guarded),
    })
}

/// Algorithm IV: per coordinate `gᵢ ← dᵢ∇fᵢ + (1 − dᵢΛᵢ) gᵢ`, where `Λ` is
/// the Hessian diagonal.
pub fn alg4_step(
    oracle: &ObjectiveOracle,
    state: &SecantState,
    x: &Vector,
    k: usize,
    cfg: &StepperConfig,
) -> Result<StepOutput> {
    let d = require(&cfg.d, "d")?;
    let g = oracle.gradient(x)?;
    let lambda = hessian_diagonal_relative(oracle, x)?;
    let base = g.hadamard(d)?;

    let mut step = match (cfg.effective_inner_mode(), &state.previous_step) {
        (InnerMode::Streaming, Some(prev)) if k > 0 => prev.clone(),
        _ => base.clone(),
    };
    let repeats = match cfg.effective_inner_mode() {
        InnerMode::Unrolled => cfg.inner_depth(k),
        InnerMode::Streaming => usize::from(k > 0 && state.previous_step.is_some()),
    };
    for i in 0..step.dim() {
        let keep = 1.0 - d[i] * lambda[i];
        let s = &mut step.as_mut_slice()[i];
        for _ in 0..repeats {
            *s = base[i] + keep * *s;
        }
    }
    step.ensure_finite("alg4 step")?;

    Ok(StepOutput {
        state: SecantState {
            previous: Some((x.clone(), g)),
            previous_step: Some(step.clone()),
        },
        step,
        guarded_columns: None,
    })
}

/// The matrix whose spectral radius governs the per-step contraction at `x`.
///
/// `(R+H)⁻¹R` for AlgI and the finite-horizon iteration, `I − MH` for
/// AlgII, `I − D H` for AlgIII (whose secant targets `H`), `I − D Λ` for
/// AlgIV, `I − αH` for gradient descent and zero for Newton.
pub fn contraction_matrix(
    oracle: &ObjectiveOracle,
    x: &Vector,
    cfg: &StepperConfig,
) -> Result<DenseMatrix> {
    let n = oracle.dim();
    let eye = DenseMatrix::identity(n);
    match cfg.algorithm {
        Algorithm::Newton => Ok(DenseMatrix::zeros(n, n)),
        Algorithm::GradientDescent => {
            let alpha = *require(&cfg.gd_step, "gd_step")?;
            eye.sub(&oracle.hessian(x)?.scale(alpha))
        }
        Algorithm::AlgI | Algorithm::FiniteHorizonBackward => {
            let r = require(&cfg.r, "r")?.to_matrix(n)?;
            let h = oracle.hessian(x)?;
            LuFactors::factor(&r.add(&h)?)?.solve(&r)
        }
        Algorithm::AlgIIClosed | Algorithm::AlgIIRecursive => {
            let m = require(&cfg.m, "m")?.to_matrix(n)?;
            eye.sub(&m.matmul(&oracle.hessian(x)?)?)
        }
        Algorithm::AlgIII => {
            let d = require(&cfg.d, "d")?;
            eye.sub(&oracle.hessian(x)?.scale_rows(d)?)
        }
        Algorithm::AlgIV => {
            let d = require(&cfg.d, "d")?;
            let lambda = hessian_diagonal_relative(oracle, x)?;
            eye.sub(&DenseMatrix::diag(d.hadamard(&lambda)?.as_slice()))
        }
    }
}
