//! Minimization algorithms derived from a finite-horizon optimal control
//! problem, with an exact linear-quadratic control oracle and a
//! config-driven experiment harness.
//!
//! * [`linalg`]: dense vectors and matrices, LU, matrix powers, spectral radius.
//! * [`differentiation`]: objective oracles, finite differences, the
//!   backward-difference secant and the Hessian diagonal.
//! * [`steppers`]: gradient descent, Newton, the finite-horizon iteration and
//!   Algorithms I to IV, plus the run loop and default parameters.
//! * [`ocp`]: linear-quadratic control problems solved exactly and by brute force.
//! * [`problems`]: the test-problem catalog.
//! * [`harness`]: JSON configs, trace CSVs, rate classification, OCP verification.

// NaN must fail comparisons such as `!(x <= tol)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod differentiation;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod ocp;
pub mod problems;
pub mod steppers;

pub use error::{Error, Result};
