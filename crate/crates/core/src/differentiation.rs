//! Derivative information consumed by the steppers.
//!
//! An [`ObjectiveOracle`] bundles `f`, `∇f` and optional analytic second
//! derivatives. Missing pieces are filled by central differences with a
//! default step of `1e-5·(1+|xᵢ|)` per coordinate.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Vector};

pub type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&Vector) -> DenseMatrix + Send + Sync>;

/// Base of the default relative finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Callbacks describing a twice-differentiable objective on `ℝⁿ`.
///
/// Callbacks must be reentrant; the harness evaluates independent runs on
/// separate threads.
#[derive(Clone)]
pub struct ObjectiveOracle {
    dim: usize,
    value: ValueFn,
    gradient: GradientFn,
    hessian: Option<HessianFn>,
    hessian_diag: Option<GradientFn>,
    known_minimizer: Option<Vector>,
}

impl ObjectiveOracle {
    pub fn new<F, G>(dim: usize, value: F, gradient: G) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
        G: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        ObjectiveOracle {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: None,
            hessian_diag: None,
            known_minimizer: None,
        }
    }

    /// Oracle whose gradient is central differences of `value`.
    pub fn from_value<F>(dim: usize, value: F) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        let value: ValueFn = Arc::new(value);
        let inner = value.clone();
        let gradient = move |x: &Vector| {
            let steps = relative_steps(x, DEFAULT_FD_STEP);
            central_gradient(&*inner, x, &steps).unwrap_or_else(|_| Vector::filled(x.dim(), f64::NAN))
        };
        ObjectiveOracle {
            dim,
            value,
            gradient: Arc::new(gradient),
            hessian: None,
            hessian_diag: None,
            known_minimizer: None,
        }
    }

    pub fn with_hessian<H>(mut self, hessian: H) -> Self
    where
        H: Fn(&Vector) -> DenseMatrix + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    pub fn with_hessian_diag<H>(mut self, diag: H) -> Self
    where
        H: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        self.hessian_diag = Some(Arc::new(diag));
        self
    }

    pub fn with_known_minimizer(mut self, x: Vector) -> Self {
        self.known_minimizer = Some(x);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_minimizer(&self) -> Option<&Vector> {
        self.known_minimizer.as_ref()
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    pub fn has_hessian_diag(&self) -> bool {
        self.hessian_diag.is_some()
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        let v = (self.value)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_finite("objective value"))
        }
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        let g = (self.gradient)(x);
        if g.dim() != self.dim {
            return Err(Error::shape("gradient", self.dim, g.dim()));
        }
        g.ensure_finite("gradient")?;
        Ok(g)
    }

    /// Analytic Hessian if supplied, otherwise [`fd_hessian`] with the default step.
    pub fn hessian(&self, x: &Vector) -> Result<DenseMatrix> {
        self.check_dim(x)?;
        match &self.hessian {
            Some(h) => {
                let m = h(x);
                if m.rows() != self.dim || m.cols() != self.dim {
                    return Err(Error::shape(
                        "hessian",
                        format!("{0}x{0}", self.dim),
                        format!("{}x{}", m.rows(), m.cols()),
                    ));
                }
                if !m.is_finite() {
                    return Err(Error::non_finite("hessian"));
                }
                Ok(m)
            }
            None => fd_hessian_relative(self, x),
        }
    }

    pub fn analytic_hessian(&self, x: &Vector) -> Option<Result<DenseMatrix>> {
        self.hessian.as_ref().map(|_| self.hessian(x))
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::shape("oracle input", self.dim, x.dim()))
        }
    }
}

impl fmt::Debug for ObjectiveOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveOracle")
            .field("dim", &self.dim)
            .field("hessian", &self.hessian.is_some())
            .field("hessian_diag", &self.hessian_diag.is_some())
            .field("known_minimizer", &self.known_minimizer)
            .finish()
    }
}

/// Default per-coordinate steps `h·(1+|xᵢ|)`.
pub fn relative_steps(x: &Vector, h: f64) -> Vec<f64> {
    x.iter().map(|xi| h * (1.0 + xi.abs())).collect()
}

fn shifted(x: &Vector, i: usize, delta: f64) -> Vector {
    let mut y = x.clone();
    y.as_mut_slice()[i] += delta;
    y
}

fn central_gradient(f: &dyn Fn(&Vector) -> f64, x: &Vector, steps: &[f64]) -> Result<Vector> {
    let mut g = Vec::with_capacity(x.dim());
    for (i, &h) in steps.iter().enumerate() {
        let plus = f(&shifted(x, i, h));
        let minus = f(&shifted(x, i, -h));
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::non_finite("finite-difference gradient"));
        }
        g.push((plus - minus) / (2.0 * h));
    }
    Ok(Vector::raw(g))
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("h", "finite-difference step must be positive"))
    }
}

/// Central-difference gradient `(f(x+h·eᵢ) − f(x−h·eᵢ)) / 2h`.
pub fn fd_gradient(oracle: &ObjectiveOracle, x: &Vector, h: f64) -> Result<Vector> {
    check_step(h)?;
    oracle.check_dim(x)?;
    central_gradient(&*oracle.value, x, &vec![h; x.dim()])
}

pub fn fd_gradient_relative(oracle: &ObjectiveOracle, x: &Vector) -> Result<Vector> {
    oracle.check_dim(x)?;
    central_gradient(&*oracle.value, x, &relative_steps(x, DEFAULT_FD_STEP))
}

fn central_hessian(oracle: &ObjectiveOracle, x: &Vector, steps: &[f64]) -> Result<DenseMatrix> {
    let n = x.dim();
    let mut h = DenseMatrix::zeros(n, n);
    for (j, &step) in steps.iter().enumerate() {
        let plus = (oracle.gradient)(&shifted(x, j, step));
        let minus = (oracle.gradient)(&shifted(x, j, -step));
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::non_finite("finite-difference hessian"));
        }
        for i in 0..n {
            h.set(i, j, (plus[i] - minus[i]) / (2.0 * step));
        }
    }
    // (H + Hᵀ)/2, exactly symmetric
    let mut sym = h.clone();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
            sym.set(i, j, avg);
            sym.set(j, i, avg);
        }
    }
    Ok(sym)
}

/// Hessian by central differences of the oracle gradient, then symmetrized.
pub fn fd_hessian(oracle: &ObjectiveOracle, x: &Vector, h: f64) -> Result<DenseMatrix> {
    check_step(h)?;
    oracle.check_dim(x)?;
    central_hessian(oracle, x, &vec![h; x.dim()])
}

pub fn fd_hessian_relative(oracle: &ObjectiveOracle, x: &Vector) -> Result<DenseMatrix> {
    oracle.check_dim(x)?;
    central_hessian(oracle, x, &relative_steps(x, DEFAULT_FD_STEP))
}

fn second_difference_diag(oracle: &ObjectiveOracle, x: &Vector, steps: &[f64]) -> Result<Vector> {
    let f0 = oracle.value(x)?;
    let mut d = Vec::with_capacity(x.dim());
    for (i, &h) in steps.iter().enumerate() {
        let plus = (oracle.value)(&shifted(x, i, h));
        let minus = (oracle.value)(&shifted(x, i, -h));
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::non_finite("hessian diagonal"));
        }
        d.push((plus - 2.0 * f0 + minus) / (h * h));
    }
    Ok(Vector::raw(d))
}

fn diag_from_callbacks(oracle: &ObjectiveOracle, x: &Vector) -> Option<Result<Vector>> {
    if let Some(diag) = &oracle.hessian_diag {
        let d = diag(x);
        if d.dim() != oracle.dim {
            return Some(Err(Error::shape("hessian_diag", oracle.dim, d.dim())));
        }
        return Some(d.ensure_finite("hessian_diag").map(|_| d));
    }
    oracle
        .analytic_hessian(x)
        .map(|h| h.map(|m| m.diagonal()))
}

/// Diagonal of `H(x)`, the `Λ(x)` consumed by the diagonal-curvature stepper.
///
/// Prefers an analytic `hessian_diag`, then the diagonal of an analytic
/// Hessian, then the second central difference
/// `(f(x+h·eᵢ) − 2f(x) + f(x−h·eᵢ)) / h²`.
pub fn hessian_diagonal(oracle: &ObjectiveOracle, x: &Vector, h: f64) -> Result<Vector> {
    check_step(h)?;
    oracle.check_dim(x)?;
    match diag_from_callbacks(oracle, x) {
        Some(d) => d,
        None => second_difference_diag(oracle, x, &vec![h; x.dim()]),
    }
}

pub fn hessian_diagonal_relative(oracle: &ObjectiveOracle, x: &Vector) -> Result<Vector> {
    oracle.check_dim(x)?;
    match diag_from_callbacks(oracle, x) {
        Some(d) => d,
        None => second_difference_diag(oracle, x, &relative_steps(x, DEFAULT_FD_STEP)),
    }
}

/// Two consecutive iterates and their gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferencePair {
    pub x_prev: Vector,
    pub grad_prev: Vector,
    pub x_curr: Vector,
    pub grad_curr: Vector,
}

/// Result of [`backward_difference_jacobian`].
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardDifference {
    pub matrix: DenseMatrix,
    /// Columns replaced by the identity because the coordinate barely moved.
    pub guarded_columns: Vec<usize>,
}

/// Default guard on `|x_curr,j − x_prev,j|` below which column `j` is replaced.
pub const DEFAULT_DIFFERENCE_GUARD: f64 = 1e-12;

/// Entrywise secant matrix `[D₁]ᵢⱼ = (∇fᵢ(x_curr) − ∇fᵢ(x_prev)) / (x_curr,j − x_prev,j)`.
///
/// This is a rank-one matrix `Δg·(1/Δx)ᵀ` on its unguarded columns; it is
/// not symmetrized. Columns whose denominator is below `guard` in magnitude
/// are replaced by the matching identity column and reported.
pub fn backward_difference_jacobian(pair: &DifferencePair, guard: f64) -> Result<BackwardDifference> {
    let n = pair.x_curr.dim();
    for v in [&pair.x_prev, &pair.grad_prev, &pair.grad_curr] {
        if v.dim() != n {
            return Err(Error::shape("backward_difference_jacobian", n, v.dim()));
        }
    }
    let dg = pair.grad_curr.sub(&pair.grad_prev)?;
    let dx = pair.x_curr.sub(&pair.x_prev)?;

    let mut matrix = DenseMatrix::zeros(n, n);
    let mut guarded_columns = Vec::new();
    for j in 0..n {
        if !(dx[j].abs() >= guard) {
            guarded_columns.push(j);
            matrix.set(j, j, 1.0);
            continue;
        }
        for i in 0..n {
            matrix.set(i, j, dg[i] / dx[j]);
        }
    }
    if guarded_columns.len() == n {
        return Err(Error::AllColumnsDegenerate);
    }
    if !matrix.is_finite() {
        return Err(Error::non_finite("backward difference"));
    }
    Ok(BackwardDifference {
        matrix,
        guarded_columns,
    })
}
