//! Linear-quadratic specialization of the tracking control problem
//!
//! ```text
//! min_u  Σ_{k=0}^{N} [ f(x_k) + ½ u_kᵀ R u_k ] + f(x_{N+1}),   x_{k+1} = x_k + u_k
//! ```
//!
//! with `f(x) = ½xᵀQx + bᵀx`. For this class the Hamiltonian system is
//! linear and the optimum is unique, so the optimal law
//! `u_k = −R⁻¹ Σ_{i=k+1}^{N+1} ∇f(x_i)` and the costate recursion
//! `p_{k−1} = p_k + ∇f(x_k)`, `p_N = ∇f(x_{N+1})` can be checked exactly.
//!
//! Two independent solvers are provided: a backward Riccati recursion
//! ([`solve_lq_exact`]) and a brute-force assembly of the stacked quadratic
//! in all controls from cost evaluations ([`brute_force_lq`]).

use rand::{Rng, RngExt};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric_pd, DenseMatrix, LuFactors, Vector};

/// Largest stacked control dimension `(N+1)·n` accepted by [`brute_force_lq`].
pub const BRUTE_FORCE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct LqOcpProblem {
    pub q: DenseMatrix,
    pub b: Vector,
    pub r: DenseMatrix,
    pub horizon: usize,
    pub x0: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqOcpSolution {
    /// `u_0 … u_N`.
    pub controls: Vec<Vector>,
    /// `x_0 … x_{N+1}`.
    pub states: Vec<Vector>,
    /// `p_0 … p_N`, recovered from `p_k = −R u_k`.
    pub costates: Vec<Vector>,
    pub cost: f64,
}

impl LqOcpProblem {
    pub fn new(q: DenseMatrix, b: Vector, r: DenseMatrix, horizon: usize, x0: Vector) -> Result<Self> {
        let prob = LqOcpProblem {
            q,
            b,
            r,
            horizon,
            x0,
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn dim(&self) -> usize {
        self.x0.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for (name, m) in [("q", &self.q), ("r", &self.r)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::shape("LqOcpProblem", format!("{n}x{n}"), format!("{}x{}", m.rows(), m.cols())));
            }
            if !is_symmetric_pd(m, 1e-12) {
                return Err(Error::invalid(name, "must be symmetric positive definite"));
            }
        }
        if self.b.dim() != n {
            return Err(Error::shape("LqOcpProblem", n, self.b.dim()));
        }
        Ok(())
    }

    /// `f(x) = ½xᵀQx + bᵀx`.
    pub fn objective(&self, x: &Vector) -> Result<f64> {
        Ok(0.5 * x.dot(&self.q.matvec(x)?)? + self.b.dot(x)?)
    }

    pub fn objective_gradient(&self, x: &Vector) -> Result<Vector> {
        self.q.matvec(x)?.add(&self.b)
    }

    /// Forward simulation `x_{k+1} = x_k + u_k`.
    pub fn simulate(&self, controls: &[Vector]) -> Result<Vec<Vector>> {
        if controls.len() != self.horizon + 1 {
            return Err(Error::shape("simulate", self.horizon + 1, controls.len()));
        }
        let mut states = Vec::with_capacity(controls.len() + 1);
        states.push(self.x0.clone());
        for u in controls {
            let next = states.last().expect("nonempty").add(u)?;
            states.push(next);
        }
        Ok(states)
    }

    /// The control cost functional evaluated on a control sequence.
    pub fn cost(&self, controls: &[Vector]) -> Result<f64> {
        let states = self.simulate(controls)?;
        let mut total = 0.0;
        for (x, u) in states.iter().zip(controls) {
            total += self.objective(x)? + 0.5 * u.dot(&self.r.matvec(u)?)?;
        }
        total += self.objective(states.last().expect("nonempty"))?;
        Ok(total)
    }

    fn solution_from_controls(&self, controls: Vec<Vector>) -> Result<LqOcpSolution> {
        let states = self.simulate(&controls)?;
        let costates = controls
            .iter()
            .map(|u| Ok(self.r.matvec(u)?.scale(-1.0)))
            .collect::<Result<Vec<_>>>()?;
        let cost = self.cost(&controls)?;
        Ok(LqOcpSolution {
            controls,
            states,
            costates,
            cost,
        })
    }
}

/// Exact optimum by backward Riccati recursion on the quadratic value function
/// `V_k(x) = ½xᵀP_k x + q_kᵀx + const`:
///
/// ```text
/// P_{N+1} = Q,  q_{N+1} = b
/// u_k = −(R + P_{k+1})⁻¹ (P_{k+1} x_k + q_{k+1})
/// P_k = Q + P_{k+1} − P_{k+1}(R + P_{k+1})⁻¹P_{k+1},  q_k = b + q_{k+1} − P_{k+1}(R + P_{k+1})⁻¹q_{k+1}
/// ```
pub fn solve_lq_exact(prob: &LqOcpProblem) -> Result<LqOcpSolution> {
    prob.validate()?;
    let steps = prob.horizon + 1;
    let mut gains: Vec<(LuFactors, DenseMatrix, Vector)> = Vec::with_capacity(steps);
    let mut p = prob.q.clone();
    let mut q = prob.b.clone();
    for _ in 0..steps {
        let lu = LuFactors::factor(&prob.r.add(&p)?)?;
        let kp = lu.solve(&p)?;
        let kq = lu.solve_vec(&q)?;
        let next_p = prob.q.add(&p)?.sub(&p.matmul(&kp)?)?;
        let next_q = prob.b.add(&q)?.sub(&p.matvec(&kq)?)?;
        gains.push((lu, p, q));
        // keep P exactly symmetric against roundoff drift
        p = next_p.add(&next_p.transpose())?.scale(0.5);
        q = next_q;
    }
    gains.reverse();

    let mut controls = Vec::with_capacity(steps);
    let mut x = prob.x0.clone();
    for (lu, p_next, q_next) in &gains {
        let u = lu.solve_vec(&p_next.matvec(&x)?.add(q_next)?)?.scale(-1.0);
        x = x.add(&u)?;
        controls.push(u);
    }
    prob.solution_from_controls(controls)
}

/// Independent oracle: assembles the stacked quadratic
/// `J(U) = c + gᵀU + ½UᵀHU` over `U = (u_0, …, u_N)` by exact second
/// differences of the simulated cost and solves `H U = −g` once.
pub fn brute_force_lq(prob: &LqOcpProblem) -> Result<LqOcpSolution> {
    prob.validate()?;
    let n = prob.dim();
    let size = (prob.horizon + 1) * n;
    if size > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            size,
            cap: BRUTE_FORCE_CAP,
        });
    }

    let unstack = |stacked: &[f64]| -> Vec<Vector> {
        stacked.chunks(n).map(|c| Vector::raw(c.to_vec())).collect()
    };
    let cost_at = |entries: &[(usize, f64)]| -> Result<f64> {
        let mut stacked = vec![0.0; size];
        for &(i, v) in entries {
            stacked[i] += v;
        }
        prob.cost(&unstack(&stacked))
    };

    // J is quadratic, so unit-step differences are exact up to roundoff.
    let j0 = cost_at(&[])?;
    let plus: Vec<f64> = (0..size).map(|i| cost_at(&[(i, 1.0)])).collect::<Result<_>>()?;
    let minus: Vec<f64> = (0..size).map(|i| cost_at(&[(i, -1.0)])).collect::<Result<_>>()?;

    let mut hessian = DenseMatrix::zeros(size, size);
    for i in 0..size {
        hessian.set(i, i, plus[i] - 2.0 * j0 + minus[i]);
        for j in i + 1..size {
            let hij = cost_at(&[(i, 1.0), (j, 1.0)])? - plus[i] - plus[j] + j0;
            hessian.set(i, j, hij);
            hessian.set(j, i, hij);
        }
    }
    let gradient = Vector::raw((0..size).map(|i| 0.5 * (plus[i] - minus[i])).collect());

    let stacked = LuFactors::factor(&hessian)?.solve_vec(&gradient.scale(-1.0))?;
    prob.solution_from_controls(unstack(stacked.as_slice()))
}

/// Residuals of the optimal control law and costate equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlLawReport {
    /// `|u_k + R⁻¹ Σ_{i=k+1}^{N+1} ∇f(x_i)|` per `k`.
    pub control_law: Vec<f64>,
    /// `|p_{k−1} − p_k − ∇f(x_k)|` for `k = 1..N`.
    pub costate_recursion: Vec<f64>,
    /// `|p_N − ∇f(x_{N+1})|`.
    pub costate_boundary: f64,
    /// `max_k |x_{k+1} − x_k − u_k|`.
    pub reconstruction: f64,
}

impl ControlLawReport {
    pub fn max_residual(&self) -> f64 {
        self.control_law
            .iter()
            .chain(&self.costate_recursion)
            .fold(self.costate_boundary.max(self.reconstruction), |m, v| m.max(*v))
    }
}

pub fn verify_control_law(prob: &LqOcpProblem, sol: &LqOcpSolution) -> Result<ControlLawReport> {
    let horizon = prob.horizon;
    if sol.controls.len() != horizon + 1
        || sol.states.len() != horizon + 2
        || sol.costates.len() != horizon + 1
    {
        return Err(Error::shape(
            "verify_control_law",
            format!("{} controls", horizon + 1),
            format!("{} controls", sol.controls.len()),
        ));
    }
    let grads = sol
        .states
        .iter()
        .map(|x| prob.objective_gradient(x))
        .collect::<Result<Vec<_>>>()?;
    let r_lu = LuFactors::factor(&prob.r)?;

    let mut control_law = vec![0.0; horizon + 1];
    let mut tail = Vector::zeros(prob.dim());
    for k in (0..=horizon).rev() {
        tail.add_assign(&grads[k + 1])?;
        let predicted = r_lu.solve_vec(&tail)?;
        control_law[k] = sol.controls[k].add(&predicted)?.norm();
    }

    let costate_recursion = (1..=horizon)
        .map(|k| {
            Ok(sol.costates[k - 1]
                .sub(&sol.costates[k])?
                .sub(&grads[k])?
                .norm())
        })
        .collect::<Result<Vec<_>>>()?;
    let costate_boundary = sol.costates[horizon].sub(&grads[horizon + 1])?.norm();

    let mut reconstruction = 0.0f64;
    for k in 0..=horizon {
        let gap = sol.states[k + 1].sub(&sol.states[k])?.sub(&sol.controls[k])?;
        reconstruction = reconstruction.max(gap.norm());
    }

    Ok(ControlLawReport {
        control_law,
        costate_recursion,
        costate_boundary,
        reconstruction,
    })
}

/// Random SPD matrix `AᵀA/n + floor·I` with `A` uniform in `[−1, 1]`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> DenseMatrix {
    let a = DenseMatrix::raw(n, n, (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect());
    let ata = a.transpose().matmul(&a).expect("square");
    ata.scale(1.0 / n as f64)
        .add(&DenseMatrix::scalar_identity(n, floor))
        .expect("same shape")
}

/// Desk-scale random problem: `n ∈ 1..=3`, `N ∈ 0..=5`.
pub fn random_lq_problem<R: Rng + ?Sized>(rng: &mut R) -> LqOcpProblem {
    let n = rng.random_range(1..=3usize);
    let horizon = rng.random_range(0..=5usize);
    let q = random_spd(rng, n, 0.1);
    let r = random_spd(rng, n, 0.1);
    let b = Vector::raw((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    let x0 = Vector::raw((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
    LqOcpProblem {
        q,
        b,
        r,
        horizon,
        x0,
    }
}
