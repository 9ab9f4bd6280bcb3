//! Test objectives with analytic derivatives and known minimizers.

use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::differentiation::ObjectiveOracle;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_check, DenseMatrix, LuFactors, Vector};
use crate::ocp::random_spd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvexityClass {
    StrictlyConvexQuadratic,
    StrictlyConvex,
    /// Convex, with a Hessian that is singular on some slice.
    SingularHessianPoint,
    Nonconvex,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub oracle: ObjectiveOracle,
    pub known_minimizer: Option<Vector>,
    pub recommended_x0: Vector,
    pub convexity: ConvexityClass,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Names accepted by [`problem_by_name`].
pub const PROBLEM_NAMES: [&str; 7] = [
    "quadratic-identity-2",
    "quadratic-diag-2-3",
    "quadratic-illcond",
    "quadratic-random",
    "rosenbrock",
    "singular-quartic",
    "logistic",
];

/// Dimension of the seeded `quadratic-random` problem.
pub const RANDOM_QUADRATIC_DIM: usize = 4;

pub fn problem_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "quadratic-identity-2" => "½|x|² in 2-D, minimizer 0",
        "quadratic-diag-2-3" => "½xᵀdiag(2,3)x − (2,3)ᵀx, minimizer (1,1)",
        "quadratic-illcond" => "½xᵀdiag(1,1e4)x, condition number 1e4",
        "quadratic-random" => "seeded random SPD quadratic in 4-D",
        "rosenbrock" => "100(x₂−x₁²)² + (1−x₁)², start (−1.2, 1)",
        "singular-quartic" => "¼x₁⁴ + x₁ + x₂², Hessian singular at x₁ = 0",
        "logistic" => "ridge-regularized logistic loss on 8 fixed samples",
        _ => return None,
    })
}

/// Looks up a catalog problem; `seed` only affects `quadratic-random`.
pub fn problem_by_name(name: &str, seed: u64) -> Result<ProblemSpec> {
    let spec = match name {
        "quadratic-identity-2" => make_quadratic(DenseMatrix::identity(2), Vector::zeros(2))?,
        "quadratic-diag-2-3" => make_quadratic(
            DenseMatrix::diag(&[2.0, 3.0]),
            Vector::raw(vec![-2.0, -3.0]),
        )?,
        "quadratic-illcond" => make_quadratic(DenseMatrix::diag(&[1.0, 1e4]), Vector::zeros(2))?,
        "quadratic-random" => random_quadratic(seed, RANDOM_QUADRATIC_DIM)?,
        "rosenbrock" => make_rosenbrock(),
        "singular-quartic" => make_singular_quartic(),
        "logistic" => make_logistic(),
        other => {
            return Err(Error::invalid(
                "problem",
                format!("unknown problem `{other}`"),
            ))
        }
    };
    Ok(spec.with_name(name))
}

/// `f = ½xᵀQx + bᵀx` with `x* = −Q⁻¹b`; starts from `x* − 𝟙`.
pub fn make_quadratic(q: DenseMatrix, b: Vector) -> Result<ProblemSpec> {
    q.require_square("make_quadratic")?;
    if b.dim() != q.rows() {
        return Err(Error::shape("make_quadratic", q.rows(), b.dim()));
    }
    if q.sub(&q.transpose())?.max_abs() > 1e-12 * (1.0 + q.max_abs()) {
        return Err(Error::invalid("q", "must be symmetric"));
    }
    cholesky_check(&q)?;
    let n = q.rows();
    let minimizer = LuFactors::factor(&q)?.solve_vec(&b.scale(-1.0))?;
    let x0 = minimizer.sub(&Vector::filled(n, 1.0))?;

    let q = Arc::new(q);
    let b = Arc::new(b);
    let (qv, bv) = (q.clone(), b.clone());
    let (qg, bg) = (q.clone(), b.clone());
    let qh = q.clone();
    let oracle = ObjectiveOracle::new(
        n,
        move |x| {
            let qx = qv.matvec(x).expect("dimension checked by oracle");
            0.5 * x.dot(&qx).expect("dim") + bv.dot(x).expect("dim")
        },
        move |x| qg.matvec(x).and_then(|qx| qx.add(&bg)).expect("dimension checked by oracle"),
    )
    .with_hessian(move |_| (*qh).clone())
    .with_known_minimizer(minimizer.clone());

    Ok(ProblemSpec {
        name: format!("quadratic-{n}"),
        oracle,
        known_minimizer: Some(minimizer),
        recommended_x0: x0,
        convexity: ConvexityClass::StrictlyConvexQuadratic,
    })
}

/// Seeded quadratic with `Q = AᵀA/n + 0.1·I` and `b` uniform in `[−1, 1]`.
pub fn random_quadratic(seed: u64, n: usize) -> Result<ProblemSpec> {
    use rand::RngExt;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_spd(&mut rng, n, 0.1);
    let b = Vector::raw((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    make_quadratic(q, b)
}

pub fn make_rosenbrock() -> ProblemSpec {
    let oracle = ObjectiveOracle::new(
        2,
        |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
        |x| {
            let t = x[1] - x[0] * x[0];
            Vector::raw(vec![-400.0 * x[0] * t - 2.0 * (1.0 - x[0]), 200.0 * t])
        },
    )
    .with_hessian(|x| {
        DenseMatrix::raw(
            2,
            2,
            vec![
                1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0,
                -400.0 * x[0],
                -400.0 * x[0],
                200.0,
            ],
        )
    })
    .with_hessian_diag(|x| Vector::raw(vec![1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0, 200.0]))
    .with_known_minimizer(Vector::raw(vec![1.0, 1.0]));

    ProblemSpec {
        name: "rosenbrock".into(),
        oracle,
        known_minimizer: Some(Vector::raw(vec![1.0, 1.0])),
        recommended_x0: Vector::raw(vec![-1.2, 1.0]),
        convexity: ConvexityClass::Nonconvex,
    }
}

/// `f = ¼x₁⁴ + x₁ + x₂²`: `H = diag(3x₁², 2)` is singular on `x₁ = 0`,
/// where `∇f = (1, 2x₂) ≠ 0`. Starts on that slice at `(0, 1)`.
pub fn make_singular_quartic() -> ProblemSpec {
    let minimizer = Vector::raw(vec![-1.0, 0.0]);
    let oracle = ObjectiveOracle::new(
        2,
        |x| 0.25 * x[0].powi(4) + x[0] + x[1] * x[1],
        |x| Vector::raw(vec![x[0].powi(3) + 1.0, 2.0 * x[1]]),
    )
    .with_hessian(|x| DenseMatrix::diag(&[3.0 * x[0] * x[0], 2.0]))
    .with_hessian_diag(|x| Vector::raw(vec![3.0 * x[0] * x[0], 2.0]))
    .with_known_minimizer(minimizer.clone());

    ProblemSpec {
        name: "singular-quartic".into(),
        oracle,
        known_minimizer: Some(minimizer),
        recommended_x0: Vector::raw(vec![0.0, 1.0]),
        convexity: ConvexityClass::SingularHessianPoint,
    }
}

/// Ridge weight of the logistic problem.
pub const LOGISTIC_RIDGE: f64 = 0.1;

/// Eight labelled 2-feature samples `(a₁, a₂, y)`; not linearly separable.
pub const LOGISTIC_DATA: [(f64, f64, f64); 8] = [
    (1.0, 2.0, 1.0),
    (2.0, 0.5, 1.0),
    (-1.0, 1.5, -1.0),
    (0.5, -1.0, -1.0),
    (-1.5, -0.5, -1.0),
    (1.5, 1.0, 1.0),
    (-0.5, -2.0, -1.0),
    (0.3, 0.8, -1.0),
];

/// `log(1 + e^{−z})` without overflow.
fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `1 / (1 + e^{z})`.
fn sigmoid_neg(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

fn margin(x: &Vector, sample: &(f64, f64, f64)) -> f64 {
    sample.2 * (sample.0 * x[0] + sample.1 * x[1])
}

fn logistic_value(x: &Vector) -> f64 {
    let loss: f64 = LOGISTIC_DATA.iter().map(|s| softplus_neg(margin(x, s))).sum();
    loss + 0.5 * LOGISTIC_RIDGE * (x[0] * x[0] + x[1] * x[1])
}

fn logistic_gradient(x: &Vector) -> Vector {
    let mut g = [LOGISTIC_RIDGE * x[0], LOGISTIC_RIDGE * x[1]];
    for s in &LOGISTIC_DATA {
        let w = -s.2 * sigmoid_neg(margin(x, s));
        g[0] += w * s.0;
        g[1] += w * s.1;
    }
    Vector::raw(g.to_vec())
}

fn logistic_hessian(x: &Vector) -> DenseMatrix {
    let mut h = [LOGISTIC_RIDGE, 0.0, 0.0, LOGISTIC_RIDGE];
    for s in &LOGISTIC_DATA {
        let p = sigmoid_neg(margin(x, s));
        let w = p * (1.0 - p);
        h[0] += w * s.0 * s.0;
        h[1] += w * s.0 * s.1;
        h[2] += w * s.1 * s.0;
        h[3] += w * s.1 * s.1;
    }
    DenseMatrix::raw(2, 2, h.to_vec())
}

/// Minimizer of the logistic problem, computed once by Newton's method to
/// `|∇f| ≤ 1e-12`.
pub fn logistic_minimizer() -> &'static Vector {
    static MINIMIZER: OnceLock<Vector> = OnceLock::new();
    MINIMIZER.get_or_init(|| {
        let mut x = Vector::zeros(2);
        for _ in 0..100 {
            let g = logistic_gradient(&x);
            if g.norm() <= 1e-12 {
                break;
            }
            let d = LuFactors::factor(&logistic_hessian(&x))
                .and_then(|lu| lu.solve_vec(&g))
                .expect("logistic Hessian is bounded below by the ridge term");
            x = x.sub(&d).expect("dim");
        }
        x
    })
}

pub fn make_logistic() -> ProblemSpec {
    let minimizer = logistic_minimizer().clone();
    let oracle = ObjectiveOracle::new(2, logistic_value, logistic_gradient)
        .with_hessian(logistic_hessian)
        .with_known_minimizer(minimizer.clone());
    ProblemSpec {
        name: "logistic".into(),
        oracle,
        known_minimizer: Some(minimizer),
        recommended_x0: Vector::raw(vec![2.0, -2.0]),
        convexity: ConvexityClass::StrictlyConvex,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_radius;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_slice(xs).unwrap()
    }

    #[test]
    fn quadratic_minimizers() {
        let p = make_quadratic(DenseMatrix::identity(3), Vector::zeros(3)).unwrap();
        assert_eq!(p.known_minimizer.unwrap(), Vector::zeros(3));

        let p = make_quadratic(DenseMatrix::diag(&[1.0, 1e4]), Vector::zeros(2)).unwrap();
        assert_eq!(p.known_minimizer.unwrap(), Vector::zeros(2));

        let p = problem_by_name("quadratic-diag-2-3", 0).unwrap();
        let xs = p.known_minimizer.clone().unwrap();
        assert!(xs.sub(&v(&[1.0, 1.0])).unwrap().norm() < 1e-15);
        assert_eq!(p.recommended_x0, Vector::zeros(2));
    }

    #[test]
    fn quadratic_rejects_indefinite() {
        let err = make_quadratic(DenseMatrix::diag(&[1.0, -2.0]), Vector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { column: 1, .. }));
    }

    #[test]
    fn rosenbrock_values() {
        let p = make_rosenbrock();
        let o = &p.oracle;
        assert_eq!(o.value(&v(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(o.gradient(&v(&[1.0, 1.0])).unwrap().norm(), 0.0);
        assert_eq!(
            o.hessian(&v(&[1.0, 1.0])).unwrap().to_nested(),
            vec![vec![802.0, -400.0], vec![-400.0, 200.0]]
        );
        assert!((o.value(&p.recommended_x0).unwrap() - 24.2).abs() < 1e-12);
    }

    #[test]
    fn quartic_derivatives() {
        let p = make_singular_quartic();
        let o = &p.oracle;
        assert_eq!(o.hessian(&v(&[0.0, 5.0])).unwrap(), DenseMatrix::diag(&[0.0, 2.0]));
        assert_eq!(o.gradient(&v(&[0.0, 1.0])).unwrap().as_slice(), &[1.0, 2.0]);
        assert_eq!(o.gradient(&v(&[-1.0, 0.0])).unwrap().norm(), 0.0);
    }

    #[test]
    fn logistic_properties() {
        let p = make_logistic();
        let o = &p.oracle;
        let f0 = o.value(&Vector::zeros(2)).unwrap();
        assert!((f0 - 8.0 * 2f64.ln()).abs() < 1e-14);
        for x in [v(&[0.0, 0.0]), v(&[3.0, -4.0]), v(&[-10.0, 10.0])] {
            let h = o.hessian(&x).unwrap();
            let shifted = h.sub(&DenseMatrix::scalar_identity(2, LOGISTIC_RIDGE)).unwrap();
            // H − λI is PSD: its smallest eigenvalue is nonnegative
            let tr = shifted[(0, 0)] + shifted[(1, 1)];
            let det = shifted[(0, 0)] * shifted[(1, 1)] - shifted[(0, 1)] * shifted[(1, 0)];
            assert!(tr >= 0.0 && det >= -1e-15);
            assert!(spectral_radius(&h).unwrap() >= LOGISTIC_RIDGE);
        }
        let xs = p.known_minimizer.unwrap();
        assert!(o.gradient(&xs).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn catalog_is_complete() {
        for name in PROBLEM_NAMES {
            let p = problem_by_name(name, 7).unwrap();
            assert_eq!(p.name, name);
            assert!(problem_description(name).is_some());
            let xs = p.known_minimizer.as_ref().unwrap();
            assert!(p.oracle.gradient(xs).unwrap().norm() <= 1e-10, "{name}");
        }
        assert!(problem_by_name("himmelblau", 0).is_err());
    }

    #[test]
    fn random_quadratic_is_seeded() {
        let a = random_quadratic(11, 4).unwrap();
        let b = random_quadratic(11, 4).unwrap();
        assert_eq!(a.known_minimizer, b.known_minimizer);
        let c = random_quadratic(12, 4).unwrap();
        assert_ne!(a.known_minimizer, c.known_minimizer);
    }
}
