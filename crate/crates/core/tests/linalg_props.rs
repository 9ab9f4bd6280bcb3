mod common;

use common::{config, matrix, rel, spd, vector};
use ocpopt::linalg::{
    geometric_sum_apply, lu_solve, matrix_power, spectral_radius, DenseMatrix, LuFactors,
};
use proptest::prelude::*;

fn abs_matrix(a: &DenseMatrix) -> DenseMatrix {
    let data = a.as_slice().iter().map(|v| v.abs()).collect();
    DenseMatrix::new(a.rows(), a.cols(), data).unwrap()
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn lu_residual_is_small(
        (a, b) in (1usize..=8).prop_flat_map(|n| (matrix(n), vector(n, -1.0, 1.0)))
    ) {
        // diagonal shift keeps the condition number moderate
        let n = a.rows();
        let a = a.add(&DenseMatrix::scalar_identity(n, n as f64)).unwrap();
        let x = LuFactors::factor(&a).unwrap().solve_vec(&b).unwrap();
        let residual = a.matvec(&x).unwrap().sub(&b).unwrap().norm();
        prop_assert!(residual <= 1e-10 * (a.max_abs() * x.norm() + b.norm()));
    }

    #[test]
    fn matrix_power_adds_exponents(
        a in (1usize..=5).prop_flat_map(matrix),
        p in 0u32..=8,
        q in 0u32..=8,
    ) {
        let lhs = matrix_power(&a, p + q).unwrap();
        let rhs = matrix_power(&a, p).unwrap().matmul(&matrix_power(&a, q).unwrap()).unwrap();
        // roundoff in a product of powers scales with the powers of |A|
        let scale = matrix_power(&abs_matrix(&a), p + q).unwrap().max_abs().max(f64::MIN_POSITIVE);
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn series_identity(
        (h, v) in (1usize..=6).prop_flat_map(|n| (spd(n, 0.1), vector(n, -1.0, 1.0))),
        r in prop::sample::select(vec![0.1, 1.0, 10.0]),
        m in 0usize..=12,
    ) {
        let n = h.rows();
        let rr = DenseMatrix::scalar_identity(n, r);
        let lu = LuFactors::factor(&rr.add(&h).unwrap()).unwrap();
        let a = lu.solve(&rr).unwrap();
        let c = lu.solve(&DenseMatrix::identity(n)).unwrap();
        let series = geometric_sum_apply(&a, &c, &v, m).unwrap();

        let newton = lu_solve(&h, &DenseMatrix::from_column(&v)).unwrap().column(0);
        let power = matrix_power(&a, m as u32 + 1).unwrap();
        let closed = newton.sub(&power.matvec(&newton).unwrap()).unwrap();
        prop_assert!(rel(&series, &closed) <= 1e-10, "rel {}", rel(&series, &closed));
    }

    #[test]
    fn diagonal_spectral_radius(d in prop::collection::vec(-1.0f64..1.0, 1..=6)) {
        let rho = spectral_radius(&DenseMatrix::diag(&d)).unwrap();
        let expected = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((rho - expected).abs() <= 1e-10);
    }

    #[test]
    fn control_contraction_is_below_one(
        h in (1usize..=6).prop_flat_map(|n| spd(n, 0.01)),
        r in 0.01f64..100.0,
    ) {
        let n = h.rows();
        let rr = DenseMatrix::scalar_identity(n, r);
        let a = lu_solve(&rr.add(&h).unwrap(), &rr).unwrap();
        let rho = spectral_radius(&a).unwrap();
        prop_assert!(rho < 1.0);
    }
}
