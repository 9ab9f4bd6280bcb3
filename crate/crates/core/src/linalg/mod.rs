//! Dense real linear algebra used by every iteration map.
//!
//! Only what the steppers need lives here: a [`Vector`] and a row-major
//! [`DenseMatrix`], LU solves with partial pivoting, integer matrix powers,
//! the streaming geometric sum `Σ Aⁱ C v`, and a power-iteration spectral
//! radius. Inverses are never formed; every `(·)⁻¹ v` becomes a solve.

mod lu;
mod matrix;
mod spectral;
mod vector;

pub use lu::{lu_solve, LuFactors, PIVOT_RELATIVE_THRESHOLD};
pub use matrix::DenseMatrix;
pub use spectral::{
    cholesky_check, is_symmetric_pd, spectral_radius, spectral_radius_closed_form, spectral_radius_with,
    PowerIterationSettings,
};
pub use vector::Vector;

use crate::error::{Error, Result};

/// `Aᵖ` by binary exponentiation; `A⁰ = I`.
pub fn matrix_power(a: &DenseMatrix, p: u32) -> Result<DenseMatrix> {
    a.require_square("matrix_power")?;
    let mut result = DenseMatrix::identity(a.rows());
    let mut base = a.clone();
    let mut exp = p;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result.matmul(&base)?;
        }
        exp >>= 1;
        if exp > 0 {
            base = base.matmul(&base)?;
        }
    }
    Ok(result)
}

/// Evaluates `Σ_{i=0}^{m} Aⁱ C v` without forming any power of `A`.
///
/// `s ← Cv; t ← Cv;` then `m` times `{ t ← A t; s ← s + t }`.
pub fn geometric_sum_apply(
    a: &DenseMatrix,
    c: &DenseMatrix,
    v: &Vector,
    m: usize,
) -> Result<Vector> {
    a.require_square("geometric_sum_apply")?;
    c.require_square("geometric_sum_apply")?;
    if c.rows() != a.rows() {
        return Err(Error::shape("geometric_sum_apply", a.rows(), c.rows()));
    }
    let first = c.matvec(v)?;
    geometric_sum_from(|t| a.matvec(t), first, m)
}

/// Same recursion as [`geometric_sum_apply`] with both `A` and the first term
/// supplied abstractly, so callers can realize `A t` as a linear solve.
pub(crate) fn geometric_sum_from<F>(mut apply: F, first: Vector, m: usize) -> Result<Vector>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    let mut sum = first.clone();
    let mut term = first;
    for _ in 0..m {
        term = apply(&term)?;
        sum.add_assign(&term)?;
    }
    Ok(sum)
}
