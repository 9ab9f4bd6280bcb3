#![allow(dead_code)]

use ocpopt::differentiation::ObjectiveOracle;
use ocpopt::linalg::{DenseMatrix, Vector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

/// Fixed-seed config so every run of the suite draws the same cases.
pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x0c_9e_17),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Dense `n×n` matrix with entries in `[−1, 1]`.
pub fn matrix(n: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-1.0f64..1.0, n * n)
        .prop_map(move |data| DenseMatrix::new(n, n, data).unwrap())
}

/// `AᵀA/n + floor·I`: SPD with eigenvalues in `[floor, n + floor]`.
pub fn spd(n: usize, floor: f64) -> impl Strategy<Value = DenseMatrix> {
    matrix(n).prop_map(move |a| {
        a.transpose()
            .matmul(&a)
            .unwrap()
            .scale(1.0 / n as f64)
            .add(&DenseMatrix::scalar_identity(n, floor))
            .unwrap()
    })
}

pub fn vector(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(lo..hi, n).prop_map(|v| Vector::from_slice(&v).unwrap())
}

/// SPD matrix and a vector of matching dimension.
pub fn spd_and_vector(max_n: usize) -> impl Strategy<Value = (DenseMatrix, Vector)> {
    (1..=max_n).prop_flat_map(|n| (spd(n, 0.1), vector(n, -2.0, 2.0)))
}

/// `f = ½xᵀQx + bᵀx` with analytic derivatives and known minimizer.
pub fn quadratic(q: DenseMatrix, b: Vector) -> ObjectiveOracle {
    ocpopt::problems::make_quadratic(q, b).unwrap().oracle
}

/// `|a − b| / |b|`, or `|a − b|` when `b = 0`.
pub fn rel(a: &Vector, b: &Vector) -> f64 {
    let d = a.sub(b).unwrap().norm();
    let s = b.norm();
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

pub fn rel_matrix(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let d = a.sub(b).unwrap().max_abs();
    let s = b.max_abs();
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

use ocpopt::harness::noise_floor;
use ocpopt::linalg::{matrix_power, spectral_radius, LuFactors};
use ocpopt::steppers::{run, Algorithm, StepperConfig, Trace, Weight};

/// Worst-case slack of the per-step error identities on a quadratic.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadraticCheck {
    pub steps: usize,
    /// `max |e_{k+1} − A^{k+1}e_k| / |e_k|` over steps above the noise floor.
    pub identity_rel: f64,
    /// `max (|e_{k+1}| − ρ^{k+1}|e_k|(1+1e-8)) / floor`; `≤ 1` passes.
    pub bound_excess: f64,
    /// Largest identity error after allowing `1e-10·|e_k| + floor`; `≤ 1` passes.
    pub identity_excess: f64,
}

impl QuadraticCheck {
    pub fn passed(&self) -> bool {
        self.identity_excess <= 1.0 && self.bound_excess <= 1.0
    }
}

/// Runs `iters` steps of `cfg` on `½xᵀQx + bᵀx` and checks
/// `e_{k+1} = A^{m+1} e_k` and `|e_{k+1}| ≤ ρ(A)^{m+1}|e_k|` for the
/// contraction `contraction`. Roundoff below the noise floor is allowed.
pub fn check_quadratic_rate(
    q: &DenseMatrix,
    b: &Vector,
    cfg: &StepperConfig,
    contraction: &DenseMatrix,
    x0: &Vector,
    iters: usize,
) -> QuadraticCheck {
    let oracle = quadratic(q.clone(), b.clone());
    let xs = oracle.known_minimizer().unwrap().clone();
    let floor = noise_floor(&xs);
    let rho = spectral_radius(contraction).unwrap();
    let cfg = cfg.clone().with_tolerances(f64::MIN_POSITIVE, f64::MIN_POSITIVE, iters);
    let outcome = run(&oracle, x0, &cfg).unwrap();
    let recs = &outcome.trace.records;

    let mut out = QuadraticCheck::default();
    for k in 0..recs.len().saturating_sub(1) {
        let ek = recs[k].x.sub(&xs).unwrap();
        let ek1 = recs[k + 1].x.sub(&xs).unwrap();
        let p = cfg.inner_depth(k) as u32 + 1;
        let predicted = matrix_power(contraction, p).unwrap().matvec(&ek).unwrap();
        let diff = ek1.sub(&predicted).unwrap().norm();
        out.steps += 1;
        if ek.norm() > floor {
            out.identity_rel = out.identity_rel.max(diff / ek.norm());
        }
        out.identity_excess = out.identity_excess.max(diff / (1e-10 * ek.norm() + floor));
        let bound = rho.powi(p as i32) * ek.norm() * (1.0 + 1e-8);
        out.bound_excess = out.bound_excess.max((ek1.norm() - bound) / floor);
    }
    out
}

/// `(R+Q)⁻¹R`.
pub fn alg1_contraction(q: &DenseMatrix, r: &DenseMatrix) -> DenseMatrix {
    LuFactors::factor(&r.add(q).unwrap()).unwrap().solve(r).unwrap()
}

/// `I − MQ`.
pub fn alg2_contraction(q: &DenseMatrix, m: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::identity(q.rows()).sub(&m.matmul(q).unwrap()).unwrap()
}

pub fn alg1_config(r: f64) -> StepperConfig {
    StepperConfig::new(Algorithm::AlgI).with_r(Weight::Scalar(r))
}

/// Strict-descent audit of a trace.
#[derive(Debug, Clone, Copy, Default)]
pub struct DescentCheck {
    pub checked: usize,
    /// Steps skipped because `f(x_k) − f*` is below the resolution of `f`.
    pub unresolvable: usize,
    pub violations: usize,
}

/// `f(x_{k+1}) < f(x_k)` for every step whose `f(x_k) − f*` exceeds
/// `16·ε·max(1, |f*|)`; below that, `f` cannot resolve a decrease.
pub fn check_descent(trace: &Trace, f_star: f64) -> DescentCheck {
    let resolution = 16.0 * f64::EPSILON * f_star.abs().max(1.0);
    let mut out = DescentCheck::default();
    for w in trace.records.windows(2) {
        if w[0].f - f_star <= resolution {
            out.unresolvable += 1;
            continue;
        }
        out.checked += 1;
        if w[1].f.partial_cmp(&w[0].f) != Some(std::cmp::Ordering::Less) {
            out.violations += 1;
        }
    }
    out
}

use ocpopt::differentiation::{fd_gradient_relative, fd_hessian_relative};
use ocpopt::problems::ProblemSpec;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst analytic-vs-finite-difference mismatch over sampled points.
#[derive(Debug, Clone, Copy, Default)]
pub struct HygieneCheck {
    pub points: usize,
    /// `max |g − g_fd|∞ / max(1, |g|∞)`.
    pub gradient_rel: f64,
    /// `max |H − H_fd|max / max(1, |H|max)`.
    pub hessian_rel: f64,
    /// `max |H − Hᵀ|max` of the analytic Hessian.
    pub asymmetry: f64,
}

/// Points uniform in the box of half-width 2 around the minimizer (or the
/// recommended start when no minimizer is known).
pub fn sample_points(spec: &ProblemSpec, seed: u64, count: usize) -> Vec<Vector> {
    let center = spec.known_minimizer.as_ref().unwrap_or(&spec.recommended_x0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = center.iter().map(|c| c + rng.random_range(-2.0..2.0)).collect();
            Vector::new(v).unwrap()
        })
        .collect()
}

pub fn derivative_hygiene(spec: &ProblemSpec, seed: u64, count: usize) -> HygieneCheck {
    let oracle = &spec.oracle;
    let mut out = HygieneCheck::default();
    for x in sample_points(spec, seed, count) {
        let g = oracle.gradient(&x).unwrap();
        let g_fd = fd_gradient_relative(oracle, &x).unwrap();
        let g_err = g.sub(&g_fd).unwrap().norm_max() / g.norm_max().max(1.0);
        out.gradient_rel = out.gradient_rel.max(g_err);

        let h = oracle.hessian(&x).unwrap();
        let h_fd = fd_hessian_relative(oracle, &x).unwrap();
        let h_err = h.sub(&h_fd).unwrap().max_abs() / h.max_abs().max(1.0);
        out.hessian_rel = out.hessian_rel.max(h_err);
        out.asymmetry = out.asymmetry.max(h.sub(&h.transpose()).unwrap().max_abs());
        out.points += 1;
    }
    out
}
