use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{DenseMatrix, Vector};

/// Knobs for the power iteration behind [`spectral_radius`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIterationSettings {
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative change in the eigenvalue-magnitude estimate that counts as settled.
    pub tol: f64,
    pub seed: u64,
}

impl Default for PowerIterationSettings {
    fn default() -> Self {
        PowerIterationSettings {
            restarts: 5,
            max_iter: 10_000,
            tol: 1e-12,
            seed: 0x005e_ed0f_0ca1,
        }
    }
}

/// Estimates `max |λ(A)|` by normalized power iteration.
///
/// Reliable for diagonalizable matrices whose dominant eigenvalue is real,
/// which covers every contraction matrix built by the steppers: `(R+H)⁻¹R`
/// is similar to a symmetric PSD matrix when `R, H ⪰ 0`. When the leading
/// eigenvalues are too close for plain iteration to settle, the iteration
/// is rerun on `A^(2^s)` formed by repeated normalized squaring, which
/// widens the gap. For `n ≤ 2` a failed iteration falls back to
/// [`spectral_radius_closed_form`].
pub fn spectral_radius(a: &DenseMatrix) -> Result<f64> {
    spectral_radius_with(a, &PowerIterationSettings::default())
}

/// Squaring depths tried, in order, after plain iteration fails.
const SQUARING_DEPTHS: [u32; 3] = [4, 8, 12];

pub fn spectral_radius_with(a: &DenseMatrix, settings: &PowerIterationSettings) -> Result<f64> {
    a.require_square("spectral_radius")?;
    if !a.is_finite() {
        return Err(Error::non_finite("spectral_radius input"));
    }
    if let Some(rho) = power_radius(a, settings)? {
        return Ok(rho);
    }
    for depth in SQUARING_DEPTHS {
        // A^(2^s) = Π cᵢ^(2^(s−i)) · B_s with B_{i+1} = B_i² / c_{i+1}
        let mut log_scale = 0.0;
        let mut b = a.clone();
        let mut weight = 1.0;
        let mut vanished = false;
        for _ in 0..=depth {
            let c = b.max_abs();
            if c == 0.0 {
                vanished = true;
                break;
            }
            b = b.scale(1.0 / c);
            log_scale += weight * c.ln();
            weight *= 0.5;
            b = b.matmul(&b)?;
        }
        if vanished {
            return Ok(0.0);
        }
        // b now holds B_s², so its radius enters with the last weight
        if let Some(rho_b) = power_radius(&b, settings)? {
            return Ok(if rho_b == 0.0 {
                0.0
            } else {
                (log_scale + weight * rho_b.ln()).exp()
            });
        }
    }
    match a.rows() {
        n if n <= 2 => spectral_radius_closed_form(a),
        _ => Err(Error::NoConvergence {
            restarts: settings.restarts,
        }),
    }
}

/// Largest settled estimate over the seeded restarts, if any settled.
fn power_radius(a: &DenseMatrix, settings: &PowerIterationSettings) -> Result<Option<f64>> {
    let n = a.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let symmetric = a.sub(&a.transpose())?.max_abs() <= 1e-14 * a.max_abs();
    let mut best: Option<f64> = None;
    for _ in 0..settings.restarts {
        let start = Vector::raw((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        if let Some(est) = power_iterate(a, start, symmetric, settings)? {
            best = Some(best.map_or(est, |b: f64| b.max(est)));
        }
    }
    Ok(best)
}

fn power_iterate(
    a: &DenseMatrix,
    start: Vector,
    symmetric: bool,
    settings: &PowerIterationSettings,
) -> Result<Option<f64>> {
    let norm = start.norm();
    if norm == 0.0 {
        return Ok(None);
    }
    let mut v = start.scale(1.0 / norm);
    let mut previous = f64::NAN;
    let mut settled = false;
    // up to max_iter to settle, then as many again to polish
    for iter in 0..2 * settings.max_iter {
        if !settled && iter == settings.max_iter {
            return Ok(None);
        }
        let w = a.matvec(&v)?;
        let est = if symmetric { v.dot(&w)?.abs() } else { w.norm() };
        let wn = w.norm();
        if !est.is_finite() || !wn.is_finite() {
            return Ok(None);
        }
        if wn == 0.0 {
            return Ok(Some(0.0));
        }
        let change = (est - previous).abs();
        if settled && change <= 4.0 * f64::EPSILON * est {
            return Ok(Some(est));
        }
        if change <= settings.tol * est {
            // keep polishing to roundoff once the estimate has settled
            settled = true;
        }
        previous = est;
        v = w.scale(1.0 / wn);
    }
    Ok(settled.then_some(previous))
}

/// Exact spectral radius for 1×1 and 2×2 matrices.
pub fn spectral_radius_closed_form(a: &DenseMatrix) -> Result<f64> {
    a.require_square("spectral_radius_closed_form")?;
    match a.rows() {
        1 => Ok(a[(0, 0)].abs()),
        2 => {
            let half_trace = 0.5 * (a[(0, 0)] + a[(1, 1)]);
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            let disc = half_trace * half_trace - det;
            if disc >= 0.0 {
                let root = disc.sqrt();
                Ok((half_trace + root).abs().max((half_trace - root).abs()))
            } else {
                // complex pair, |λ|² = det
                Ok(det.sqrt())
            }
        }
        n => Err(Error::shape("spectral_radius_closed_form", "n <= 2", n)),
    }
}

/// Symmetric within `tol·(1+‖A‖_max)` and positive definite (Cholesky succeeds).
pub fn is_symmetric_pd(a: &DenseMatrix, tol: f64) -> bool {
    if !a.is_square() || !a.is_finite() {
        return false;
    }
    let n = a.rows();
    let scale = 1.0 + a.max_abs();
    for i in 0..n {
        for j in i + 1..n {
            if (a[(i, j)] - a[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    cholesky_check(a).is_ok()
}

/// Cholesky on the symmetric part of `a`; reports the first non-positive pivot.
pub fn cholesky_check(a: &DenseMatrix) -> Result<()> {
    a.require_square("cholesky_check")?;
    let n = a.rows();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::SingularMatrix { column: j, pivot: d });
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = 0.5 * (a[(i, j)] + a[(j, i)]);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(())
}
