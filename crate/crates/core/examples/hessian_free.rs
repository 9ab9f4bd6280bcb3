//! Algorithms III and IV never form the Hessian: III builds a secant from
//! consecutive gradients, IV uses only the Hessian diagonal. Here the
//! logistic objective supplies value and gradient only, so the diagonal
//! comes from finite differences of the gradient.
//!
//! The unrolled inner mode is shown for contrast: the secant is rank one, so
//! `I − D·D₁` keeps a unit eigenvalue and the unrolled sum grows with `k`.

use ocpopt::differentiation::ObjectiveOracle;
use ocpopt::linalg::Vector;
use ocpopt::problems::make_logistic;
use ocpopt::steppers::{default_parameters, run, Algorithm, InnerMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = make_logistic();
    let full = reference.oracle.clone();
    let oracle = ObjectiveOracle::new(
        2,
        {
            let o = full.clone();
            move |x| o.value(x).unwrap_or(f64::NAN)
        },
        move |x| full.gradient(x).unwrap_or_else(|_| Vector::filled(2, f64::NAN)),
    )
    .with_known_minimizer(reference.known_minimizer.clone().expect("stored minimizer"));
    let x0 = &reference.recommended_x0;

    for (alg, mode) in [
        (Algorithm::AlgIII, InnerMode::Streaming),
        (Algorithm::AlgIII, InnerMode::Unrolled),
        (Algorithm::AlgIV, InnerMode::Unrolled),
        (Algorithm::AlgIV, InnerMode::Streaming),
    ] {
        let cfg = default_parameters(&oracle, x0, alg)?.with_inner_mode(mode);
        let outcome = run(&oracle, x0, &cfg)?;
        let last = outcome.trace.last().expect("trace is never empty");
        println!(
            "{alg:<5} {mode:<9?} d = {:?}: {:>3} iterations, stop {}, error {:.2e}",
            cfg.d.as_ref().map(|d| d.as_slice().to_vec()).unwrap_or_default(),
            outcome.trace.iterations(),
            outcome.stop.label(),
            last.err_norm.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
