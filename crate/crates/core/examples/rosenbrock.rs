//! Algorithm II with default parameters on Rosenbrock from (−1.2, 1), with a
//! bitwise reproducibility check of the recorded trace.

use ocpopt::problems::make_rosenbrock;
use ocpopt::steppers::{default_parameters, run, Algorithm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = make_rosenbrock();
    let x0 = &problem.recommended_x0;
    let cfg = default_parameters(&problem.oracle, x0, Algorithm::AlgIIRecursive)?;
    println!("default M = {:?}", cfg.m);

    let outcome = run(&problem.oracle, x0, &cfg)?;
    for rec in outcome.trace.records.iter().step_by(50) {
        println!(
            "k = {:3}  f = {:.6e}  |grad| = {:.3e}  |x − x*| = {:.3e}",
            rec.k,
            rec.f,
            rec.grad_norm,
            rec.err_norm.unwrap_or(f64::NAN)
        );
    }
    let last = outcome.trace.last().expect("trace is never empty");
    println!(
        "stopped by {} after {} iterations at {:?}",
        outcome.stop.label(),
        outcome.trace.iterations(),
        last.x.as_slice()
    );

    let again = run(&problem.oracle, x0, &cfg)?;
    println!("rerun identical: {}", again.trace == outcome.trace);
    Ok(())
}
