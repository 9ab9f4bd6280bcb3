//! `f = ¼x₁⁴ + x₁ + x₂²` started on the slice `x₁ = 0` where `H` is singular.
//! Newton cannot take a step; the recursive and Hessian-free steppers can.

use ocpopt::problems::make_singular_quartic;
use ocpopt::steppers::{default_parameters, newton_step, parameter_warnings, run, Algorithm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = make_singular_quartic();
    let x0 = &problem.recommended_x0;
    println!("H(x0) = {:?}", problem.oracle.hessian(x0)?.to_nested());

    match newton_step(&problem.oracle, x0) {
        Ok(step) => println!("newton: unexpected step {:?}", step.as_slice()),
        Err(e) => println!("newton: {e}"),
    }

    for alg in [Algorithm::AlgIIRecursive, Algorithm::AlgIII, Algorithm::AlgIV] {
        let cfg = default_parameters(&problem.oracle, x0, alg)?;
        for w in parameter_warnings(&problem.oracle, x0, &cfg)? {
            println!("{alg}: warning: {w}");
        }
        let outcome = run(&problem.oracle, x0, &cfg)?;
        let last = outcome.trace.last().expect("trace is never empty");
        println!(
            "{alg}: first step {:?}, {} iterations, |grad| = {:.2e}, x = {:?}",
            outcome.trace.records[0].step.as_ref().map(|s| s.as_slice().to_vec()),
            outcome.trace.iterations(),
            last.grad_norm,
            last.x.as_slice()
        );
    }
    Ok(())
}
