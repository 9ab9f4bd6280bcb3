mod common;

use common::{
    alg1_config, alg1_contraction, check_descent, check_quadratic_rate, config, quadratic, rel,
    spd, spd_and_vector, vector,
};
use ocpopt::linalg::{is_symmetric_pd, lu_solve, matrix_power, spectral_radius, DenseMatrix, Vector};
use ocpopt::problems::make_singular_quartic;
use ocpopt::steppers::{
    alg1_closed_step, alg1_step, alg2_closed_step, alg2_recursive_step, alg3_step, alg4_step,
    newton_step, run, run_unchecked, Algorithm, InnerMode, SecantState, StepperConfig, Weight,
};
use proptest::prelude::*;

fn v(xs: &[f64]) -> Vector {
    Vector::from_slice(xs).unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn alg2_closed_equals_recursive(
        ((h, g), m) in (1usize..=5).prop_flat_map(|n| ((spd(n, 0.1), vector(n, -2.0, 2.0)), spd(n, 0.1))),
        k in 0usize..=10,
    ) {
        // scale M so that ρ(I − MH) < 1
        let rho = spectral_radius(&m.matmul(&h).unwrap()).unwrap();
        let m = m.scale(1.0 / rho);
        let oracle = quadratic(h.clone(), g);
        let x = Vector::zeros(h.rows());
        let cfg = StepperConfig::new(Algorithm::AlgIIRecursive).with_m(Weight::Matrix(m));
        let closed = alg2_closed_step(&oracle, &x, k, &cfg).unwrap();
        let recursive = alg2_recursive_step(&oracle, &x, k, &cfg).unwrap();
        prop_assert!(rel(&recursive, &closed) <= 1e-11, "{}", rel(&recursive, &closed));
    }

    #[test]
    fn alg1_series_equals_closed_form(
        (h, b) in spd_and_vector(5),
        x in vector(5, -1.0, 1.0),
        r in prop::sample::select(vec![0.1, 1.0, 10.0]),
        k in 0usize..=10,
    ) {
        let n = h.rows();
        let x = Vector::from_slice(&x.as_slice()[..n]).unwrap();
        let oracle = quadratic(h, b);
        let cfg = alg1_config(r);
        let series = alg1_step(&oracle, &x, k, &cfg).unwrap();
        let closed = alg1_closed_step(&oracle, &x, k, &cfg).unwrap();
        prop_assert!(rel(&series, &closed) <= 1e-10);
    }

    #[test]
    fn alg1_without_control_cost_is_newton(
        (h, b) in spd_and_vector(6),
        k in 0usize..=6,
    ) {
        let oracle = quadratic(h.clone(), b);
        let x = Vector::filled(h.rows(), 0.5);
        let cfg = alg1_config(0.0);
        let step = alg1_step(&oracle, &x, k, &cfg).unwrap();
        let newton = newton_step(&oracle, &x).unwrap();
        prop_assert!(rel(&step, &newton) <= 1e-12);
    }

    #[test]
    fn alg1_quadratic_error_map_is_exact(
        (q, b) in spd_and_vector(4),
        r in prop::sample::select(vec![0.1, 1.0, 10.0]),
    ) {
        let n = q.rows();
        let rr = DenseMatrix::scalar_identity(n, r);
        let xs = lu_solve(&q, &DenseMatrix::from_column(&b.scale(-1.0))).unwrap().column(0);
        let x0 = xs.add(&Vector::filled(n, 1.0)).unwrap();
        let check = check_quadratic_rate(&q, &b, &alg1_config(r), &alg1_contraction(&q, &rr), &x0, 20);
        prop_assert!(check.passed(), "{check:?}");
    }

    #[test]
    fn alg1_descends_on_quadratics(
        (q, b) in spd_and_vector(4),
        r in 0.01f64..10.0,
    ) {
        let oracle = quadratic(q.clone(), b);
        let xs = oracle.known_minimizer().unwrap().clone();
        let f_star = oracle.value(&xs).unwrap();
        let x0 = xs.add(&Vector::filled(q.rows(), 2.0)).unwrap();
        let outcome = run(&oracle, &x0, &alg1_config(r)).unwrap();
        prop_assert!(outcome.stop.is_converged());
        let check = check_descent(&outcome.trace, f_star);
        prop_assert_eq!(check.violations, 0, "{:?}", check);
    }

    #[test]
    fn alg1_series_matrix_is_spd(
        q in (1usize..=5).prop_flat_map(|n| spd(n, 0.1)),
        r in prop::sample::select(vec![0.1, 1.0, 10.0]),
        k in 0u32..=6,
    ) {
        let n = q.rows();
        let rr = DenseMatrix::scalar_identity(n, r);
        let a = alg1_contraction(&q, &rr);
        let q_inv = lu_solve(&q, &DenseMatrix::identity(n)).unwrap();
        let product = matrix_power(&a, k + 1).unwrap().matmul(&q_inv).unwrap();
        prop_assert!(is_symmetric_pd(&product, 1e-10));
    }

    #[test]
    fn singular_hessian_steps_are_finite(x2 in -3.0f64..3.0, k in 0usize..6) {
        let p = make_singular_quartic();
        let x = v(&[0.0, x2]);
        prop_assert!(newton_step(&p.oracle, &x).is_err());

        let m = StepperConfig::new(Algorithm::AlgIIRecursive).with_m(Weight::Scalar(0.5));
        prop_assert!(alg2_recursive_step(&p.oracle, &x, k, &m).unwrap().is_finite());

        let state = SecantState {
            previous: Some((v(&[0.3, x2 + 0.1]), p.oracle.gradient(&v(&[0.3, x2 + 0.1])).unwrap())),
            previous_step: Some(v(&[0.1, 0.1])),
        };
        for alg in [Algorithm::AlgIII, Algorithm::AlgIV] {
            let cfg = StepperConfig::new(alg).with_d(v(&[0.25, 0.25]));
            let fresh = if alg == Algorithm::AlgIII {
                alg3_step(&p.oracle, &SecantState::default(), &x, k, &cfg)
            } else {
                alg4_step(&p.oracle, &SecantState::default(), &x, k, &cfg)
            };
            prop_assert!(fresh.unwrap().step.is_finite());
            let threaded = if alg == Algorithm::AlgIII {
                alg3_step(&p.oracle, &state, &x, k, &cfg)
            } else {
                alg4_step(&p.oracle, &state, &x, k, &cfg)
            };
            prop_assert!(threaded.unwrap().step.is_finite());
        }
    }

    #[test]
    fn alg4_matches_alg2_on_diagonal_hessians(
        diag in prop::collection::vec(0.2f64..5.0, 1..=5),
        scale in 0.1f64..0.9,
    ) {
        let n = diag.len();
        let q = DenseMatrix::diag(&diag);
        let b = Vector::from_slice(&(0..n).map(|i| i as f64 - 1.0).collect::<Vec<_>>()).unwrap();
        let oracle = quadratic(q, b);
        let d = Vector::from_slice(&diag.iter().map(|l| scale / l).collect::<Vec<_>>()).unwrap();
        let x0 = Vector::filled(n, 3.0);

        let alg4 = StepperConfig::new(Algorithm::AlgIV).with_d(d.clone());
        let alg2 = StepperConfig::new(Algorithm::AlgIIRecursive)
            .with_m(Weight::Matrix(DenseMatrix::diag(d.as_slice())));
        let t4 = run(&oracle, &x0, &alg4).unwrap().trace;
        let t2 = run(&oracle, &x0, &alg2).unwrap().trace;
        prop_assert_eq!(t4.len(), t2.len());
        for (a, b) in t4.records.iter().zip(&t2.records) {
            prop_assert!(a.x.sub(&b.x).unwrap().norm() <= 1e-12 * (1.0 + b.x.norm()));
        }
    }

    #[test]
    fn horizon_cap_one_is_preconditioned_gradient_descent(
        (q, b) in spd_and_vector(4),
        m in 0.05f64..0.5,
    ) {
        let oracle = quadratic(q.clone(), b);
        let x0 = Vector::filled(q.rows(), 1.5);
        let cfg = StepperConfig::new(Algorithm::AlgIIRecursive)
            .with_m(Weight::Scalar(m))
            .with_horizon_cap(1)
            .with_tolerances(1e-10, 1e-14, 30);
        let trace = run(&oracle, &x0, &cfg).unwrap().trace;
        let mut x = x0.clone();
        for rec in &trace.records {
            prop_assert_eq!(&rec.x, &x);
            x = x.sub(&oracle.gradient(&x).unwrap().scale(m)).unwrap();
        }
    }
}

#[test]
fn runs_are_bitwise_deterministic() {
    let p = ocpopt::problems::make_logistic();
    for alg in Algorithm::ALL {
        let cfg = ocpopt::steppers::default_parameters(&p.oracle, &p.recommended_x0, alg).unwrap();
        let a = run(&p.oracle, &p.recommended_x0, &cfg).unwrap();
        let b = run(&p.oracle, &p.recommended_x0, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a.trace).unwrap(),
            serde_json::to_string(&b.trace).unwrap(),
            "{alg}"
        );
        assert_eq!(a.stop, b.stop);
    }
}

#[test]
fn quadratic_newton_limit_takes_one_step() {
    let q = DenseMatrix::from_rows(&[&[3.0, 1.0], &[1.0, 2.0]]).unwrap();
    let oracle = quadratic(q, v(&[1.0, 1.0]));
    let out = run_unchecked(&oracle, &v(&[5.0, -5.0]), &alg1_config(0.0)).unwrap();
    assert_eq!(out.trace.iterations(), 1);
    assert!(out.stop.is_converged());
}

#[test]
fn alg3_first_step_uses_identity_secant() {
    let p = make_singular_quartic();
    let d = v(&[0.25, 0.5]);
    for mode in [InnerMode::Unrolled, InnerMode::Streaming] {
        let cfg = StepperConfig::new(Algorithm::AlgIII).with_d(d.clone()).with_inner_mode(mode);
        let out = alg3_step(&p.oracle, &SecantState::default(), &p.recommended_x0, 0, &cfg).unwrap();
        let g = p.oracle.gradient(&p.recommended_x0).unwrap();
        assert_eq!(out.step, g.hadamard(&d).unwrap());
    }
}

#[test]
fn capped_horizon_degrades_to_linear() {
    let q = DenseMatrix::diag(&[1.0, 4.0]);
    let oracle = quadratic(q, Vector::zeros(2));
    let x0 = v(&[1.0, 0.0]);
    let cfg = alg1_config(1.0).with_horizon_cap(2);
    let out = run(&oracle, &x0, &cfg).unwrap();
    let errs = out.trace.errors().unwrap();
    // along the first eigenvector A = 1/2, so each capped step contracts by 1/4
    for k in 1..6 {
        assert!((errs[k + 1] / errs[k] - 0.25).abs() < 1e-12);
    }
}
