use crate::error::{Error, Result};

use super::{DenseMatrix, Vector};

/// Pivots smaller than this times `‖A‖_max` mark the matrix as singular.
pub const PIVOT_RELATIVE_THRESHOLD: f64 = 1e-14;

/// Packed LU factors with row permutation, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Doolittle elimination with partial pivoting.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        a.require_square("lu_solve")?;
        let n = a.rows();
        let threshold = PIVOT_RELATIVE_THRESHOLD * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, lu.get(r, col).abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= threshold || pivot_abs == 0.0 {
                return Err(Error::SingularMatrix {
                    column: col,
                    pivot: pivot_abs,
                });
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = lu.get(col, j);
                    lu.set(col, j, lu.get(pivot_row, j));
                    lu.set(pivot_row, j, tmp);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = lu.get(col, col);
            for r in col + 1..n {
                let factor = lu.get(r, col) / pivot;
                lu.set(r, col, factor);
                if factor == 0.0 {
                    continue;
                }
                for j in col + 1..n {
                    lu.set(r, j, lu.get(r, j) - factor * lu.get(col, j));
                }
            }
        }
        Ok(LuFactors { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve_vec(&self, b: &Vector) -> Result<Vector> {
        let n = self.dim();
        if b.dim() != n {
            return Err(Error::shape("lu_solve", n, b.dim()));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(Vector::raw(x))
    }

    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(Error::shape("lu_solve", n, b.rows()));
        }
        let mut out = DenseMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let col = self.solve_vec(&b.column(j))?;
            for i in 0..n {
                out.set(i, j, col[i]);
            }
        }
        Ok(out)
    }
}

/// Solves `A X = B` for square `A`.
pub fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    LuFactors::factor(a)?.solve(b)
}
