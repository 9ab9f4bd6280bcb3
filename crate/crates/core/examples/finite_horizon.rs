//! The finite-horizon backward iteration takes exactly N+1 steps, the k-th
//! using N−k+1 series terms. A horizon cap on Algorithm I instead fixes the
//! number of terms, trading the superlinear rate for a linear one.

use ocpopt::harness::analyze_trace;
use ocpopt::problems::problem_by_name;
use ocpopt::steppers::{run, Algorithm, StepperConfig, Weight};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = problem_by_name("quadratic-illcond", 0)?;
    let x0 = &problem.recommended_x0;

    for n in [0, 2, 5] {
        let cfg = StepperConfig::new(Algorithm::FiniteHorizonBackward)
            .with_r(Weight::Scalar(10.0))
            .with_horizon(n);
        let outcome = run(&problem.oracle, x0, &cfg)?;
        let last = outcome.trace.last().expect("trace is never empty");
        println!(
            "N = {n}: {} steps, stop {}, error {:.3e}",
            outcome.trace.iterations(),
            outcome.stop.label(),
            last.err_norm.unwrap_or(f64::NAN)
        );
    }

    for cap in [None, Some(1), Some(3)] {
        let mut cfg = StepperConfig::new(Algorithm::AlgI).with_r(Weight::Scalar(10.0));
        if let Some(c) = cap {
            cfg = cfg.with_horizon_cap(c);
        }
        let outcome = run(&problem.oracle, x0, &cfg)?;
        let analysis = analyze_trace(&problem.oracle, &cfg, x0, &outcome.trace);
        println!(
            "alg1 cap {cap:?}: {} iterations, {}",
            outcome.trace.iterations(),
            analysis.class().label()
        );
    }
    Ok(())
}
