//! The control problem behind the algorithms, on a quadratic objective:
//! minimize Σ_k [f(x_k) + ½u_kᵀRu_k] + f(x_{N+1}) subject to x_{k+1} = x_k + u_k.
//! Solves it exactly, cross-checks by brute force, and verifies the optimal
//! control law u_k = −R⁻¹ Σ_{i>k} ∇f(x_i) with its costates.

use ocpopt::linalg::{DenseMatrix, Vector};
use ocpopt::ocp::{brute_force_lq, solve_lq_exact, verify_control_law, LqOcpProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = DenseMatrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]])?;
    let b = Vector::from_slice(&[-1.0, 0.5])?;
    let r = DenseMatrix::scalar_identity(2, 0.5);
    let prob = LqOcpProblem::new(q, b, r, 4, Vector::from_slice(&[3.0, -2.0])?)?;

    let exact = solve_lq_exact(&prob)?;
    let brute = brute_force_lq(&prob)?;
    println!("cost exact {:.12}  brute force {:.12}", exact.cost, brute.cost);
    for (k, (u, x)) in exact.controls.iter().zip(&exact.states).enumerate() {
        println!("k = {k}  x = {:?}  u = {:?}", x.as_slice(), u.as_slice());
    }
    println!("x_(N+1) = {:?}", exact.states.last().map(|x| x.as_slice()));

    let report = verify_control_law(&prob, &exact)?;
    println!("control-law residuals {:?}", report.control_law);
    println!("costate recursion residuals {:?}", report.costate_recursion);
    println!("costate boundary residual {:.2e}", report.costate_boundary);
    println!("max residual {:.2e}", report.max_residual());
    Ok(())
}
