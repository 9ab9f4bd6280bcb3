//! As the control weight `R = r·I` shrinks, the Algorithm I step approaches
//! the Newton step; at `R = 0` they coincide.

use ocpopt::linalg::Vector;
use ocpopt::problems::{make_logistic, make_quadratic};
use ocpopt::linalg::DenseMatrix;
use ocpopt::steppers::{alg1_step, newton_step, run_unchecked, Algorithm, StepperConfig, Weight};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = make_logistic();
    let x = Vector::from_slice(&[1.5, -0.5])?;
    let newton = newton_step(&problem.oracle, &x)?;
    println!("newton step {:?}", newton.as_slice());

    for r in [10.0, 1.0, 0.1, 0.01, 1e-4, 0.0] {
        let cfg = StepperConfig::new(Algorithm::AlgI).with_r(Weight::Scalar(r));
        let step = alg1_step(&problem.oracle, &x, 0, &cfg)?;
        let gap = step.sub(&newton)?.norm() / newton.norm();
        println!("r = {r:<7} relative gap to newton {gap:.3e}");
    }

    // R = 0 is outside the validated parameter set, so use the unchecked loop.
    let q = DenseMatrix::from_rows(&[&[4.0, 1.0], &[1.0, 3.0]])?;
    let quad = make_quadratic(q, Vector::from_slice(&[1.0, -2.0])?)?;
    let cfg = StepperConfig::new(Algorithm::AlgI).with_r(Weight::Scalar(0.0));
    let outcome = run_unchecked(&quad.oracle, &quad.recommended_x0, &cfg)?;
    println!(
        "quadratic with R = 0: {} iteration(s), stop {}",
        outcome.trace.iterations(),
        outcome.stop.label()
    );
    Ok(())
}
