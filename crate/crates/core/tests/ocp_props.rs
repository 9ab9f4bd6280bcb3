mod common;

use ocpopt::harness::{problem_for_seed, solution_distance};
use ocpopt::ocp::{brute_force_lq, solve_lq_exact, verify_control_law};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(common::config(100))]

    #[test]
    fn exact_matches_brute_force(seed in any::<u64>()) {
        let prob = problem_for_seed(seed);
        let exact = solve_lq_exact(&prob).unwrap();
        let brute = brute_force_lq(&prob).unwrap();
        let d = solution_distance(&exact, &brute);
        prop_assert!(d <= 1e-9, "seed {seed}: distance {d}");
        let residual = verify_control_law(&prob, &exact).unwrap().max_residual();
        prop_assert!(residual <= 1e-9, "seed {seed}: residual {residual}");
    }

    #[test]
    fn costate_boundary_and_reconstruction(seed in any::<u64>()) {
        let prob = problem_for_seed(seed);
        let sol = solve_lq_exact(&prob).unwrap();
        let report = verify_control_law(&prob, &sol).unwrap();
        prop_assert!(report.costate_boundary <= 1e-9);
        prop_assert!(report.reconstruction <= 1e-12);
        prop_assert_eq!(sol.states.len(), prob.horizon + 2);
        prop_assert_eq!(&sol.states[0], &prob.x0);
    }
}

proptest! {
    #![proptest_config(common::config(20))]

    #[test]
    fn single_control_perturbations_never_lower_cost(seed in any::<u64>()) {
        let prob = problem_for_seed(seed);
        let sol = solve_lq_exact(&prob).unwrap();
        let base = prob.cost(&sol.controls).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let k = rng.random_range(0..sol.controls.len());
            let i = rng.random_range(0..prob.dim());
            let delta = if rng.random_range(0..2) == 0 { 1e-3 } else { -1e-3 };
            let mut controls = sol.controls.clone();
            let mut u = controls[k].clone().into_vec();
            u[i] += delta;
            controls[k] = ocpopt::linalg::Vector::new(u).unwrap();
            let perturbed = prob.cost(&controls).unwrap();
            prop_assert!(perturbed >= base - 1e-12 * base.abs().max(1.0),
                "seed {seed}: {perturbed} < {base}");
        }
    }
}
