//! Perron roots and vectors of nonnegative matrices by shifted power iteration.
//!
//! Iterating on `M + eps I` instead of `M` makes every irreducible matrix
//! primitive, so periodic support graphs (a 2-cycle, the cyclic lift) do not
//! make the iterates oscillate. The shift moves the whole spectrum by `eps`
//! and leaves the eigenvectors alone.
//!
//! For a positive iterate `v` the Collatz-Wielandt ratios `(Mv)_i / v_i`
//! bracket the Perron root; the iteration stops when the bracket closes or
//! when the extrapolated remaining change of the upper end drops below the
//! tolerance.
//!
//! Reducible matrices are split into the diagonal blocks of their strongly
//! connected components first. The Perron root of an irreducible block is
//! simple, so iteration converges geometrically; on the whole matrix a
//! repeated root shared by two blocks would converge only like `1/k`.

use nalgebra::{DMatrix, DVector};

use super::scc::{is_irreducible, support_components};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-14;
pub const MAX_ITERATIONS: usize = 100_000;

/// Largest dimension handed to the dense eigensolver when power iteration stalls.
pub const DENSE_FALLBACK_MAX: usize = 512;

/// Iterate components below this are left out of the ratio bracket.
const TINY: f64 = 1e-280;

/// Consecutive stalled iterations accepted as convergence.
const STALL_RUN: usize = 3;

/// Changes below this many ulps of the estimate are rounding noise.
const NOISE_ULPS: f64 = 8.0;

pub(crate) fn check_nonnegative(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if let Some(v) = m.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "matrix entry {v} is not finite and nonnegative"
        )));
    }
    Ok(())
}

/// The shift `1e-3 * max(1, max entry)`.
pub fn shift_for(m: &DMatrix<f64>) -> f64 {
    1e-3 * m.iter().copied().fold(1.0, f64::max)
}

/// Result of one shifted power iteration run.
#[derive(Debug, Clone)]
pub struct PowerIteration {
    /// Lower Collatz-Wielandt ratio, shift removed.
    pub lower: f64,
    /// Upper Collatz-Wielandt ratio, shift removed; the root estimate.
    pub upper: f64,
    /// Final iterate, positive, scaled to max entry 1.
    pub vector: DVector<f64>,
    pub iterations: usize,
    /// Whether the ratio bracket closed (as opposed to the estimate stalling).
    pub bracket_closed: bool,
    pub converged: bool,
}

/// Runs shifted power iteration on `m` starting from the all-ones vector.
pub fn shifted_power_iteration(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> PowerIteration {
    let n = m.nrows();
    let eps = shift_for(m);
    let mut v = DVector::from_element(n, 1.0);
    let mut w = DVector::zeros(n);
    let mut prev_upper = f64::INFINITY;
    let mut prev_change = 0.0;
    let mut stalled = 0;
    let (mut lower, mut upper) = (0.0, f64::INFINITY);

    for it in 1..=max_iter {
        w.gemv(1.0, m, &v, 0.0);
        w.axpy(eps, &v, 1.0);
        lower = f64::INFINITY;
        upper = 0.0;
        for i in 0..n {
            if v[i] > TINY {
                let r = w[i] / v[i];
                lower = lower.min(r);
                upper = upper.max(r);
            }
        }
        let scale = w.amax();
        v.copy_from(&w);
        v /= scale;

        let width_ok = upper - lower <= tol * upper;
        // Extrapolate the remaining change of the upper estimate from the
        // ratio of successive changes; changes at rounding level count as done.
        let change = (prev_upper - upper).abs();
        let ratio = if prev_change > 0.0 { change / prev_change } else { 1.0 };
        let tail = if ratio < 1.0 { change * ratio / (1.0 - ratio) } else { f64::INFINITY };
        let at_noise = change <= NOISE_ULPS * f64::EPSILON * upper;
        if at_noise || (change + tail <= tol * upper) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        prev_upper = upper;
        prev_change = change;
        if width_ok || stalled >= STALL_RUN {
            return PowerIteration {
                lower: (lower - eps).max(0.0),
                upper: (upper - eps).max(0.0),
                vector: v,
                iterations: it,
                bracket_closed: width_ok,
                converged: true,
            };
        }
    }
    PowerIteration {
        lower: (lower - eps).max(0.0),
        upper: (upper - eps).max(0.0),
        vector: v,
        iterations: max_iter,
        bracket_closed: false,
        converged: false,
    }
}

fn block_root(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    let run = shifted_power_iteration(m, tol, MAX_ITERATIONS);
    if run.converged {
        Ok(run.upper)
    } else {
        Err(Error::NonConvergence { iterations: run.iterations })
    }
}

/// Perron root by shifted power iteration on each irreducible diagonal
/// block; errors when the iteration cap is hit.
pub fn power_spectral_radius(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    check_nonnegative(m)?;
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let blocks = support_components(m);
    if blocks.len() == 1 {
        return block_root(m, tol);
    }
    let mut rho = 0.0f64;
    for block in &blocks {
        let r = match block.as_slice() {
            [i] => m[(*i, *i)],
            _ => block_root(&m.select_rows(block).select_columns(block), tol)?,
        };
        rho = rho.max(r);
    }
    Ok(rho)
}

/// Spectral radius from the full (complex) spectrum via Hessenberg QR.
pub fn dense_spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral radius of a nonnegative matrix within relative tolerance `tol`.
///
/// Falls back to a dense eigensolve for matrices up to
/// [`DENSE_FALLBACK_MAX`] when power iteration does not converge.
pub fn spectral_radius(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    match power_spectral_radius(m, tol) {
        Err(Error::NonConvergence { .. }) if m.nrows() <= DENSE_FALLBACK_MAX => {
            Ok(dense_spectral_radius(m))
        }
        other => other,
    }
}

/// Right and left Perron vectors of an irreducible nonnegative matrix.
#[derive(Debug, Clone)]
pub struct PerronPair {
    /// `M v = rho v`, positive, max entry 1.
    pub right: DVector<f64>,
    /// `M^T u = rho u`, positive, max entry 1.
    pub left: DVector<f64>,
    pub rho: f64,
}

/// Residual bound required of returned Perron vectors.
pub const PERRON_RESIDUAL: f64 = 1e-9;

pub fn perron_vectors(m: &DMatrix<f64>) -> Result<PerronPair> {
    check_nonnegative(m)?;
    if !is_irreducible(m) {
        return Err(Error::Reducible);
    }
    let right = shifted_power_iteration(m, DEFAULT_TOL, MAX_ITERATIONS);
    let left = shifted_power_iteration(&m.transpose(), DEFAULT_TOL, MAX_ITERATIONS);
    if !right.converged || !left.converged {
        return Err(Error::NonConvergence { iterations: right.iterations.max(left.iterations) });
    }
    let rho = right.upper;
    let (v, u) = (right.vector, left.vector);
    let res_r = (m * &v - &v * rho).amax();
    let res_l = (m.tr_mul(&u) - &u * rho).amax();
    if res_r > PERRON_RESIDUAL || res_l > PERRON_RESIDUAL || v.min() <= 0.0 || u.min() <= 0.0 {
        return Err(Error::InvariantViolation(format!(
            "Perron residuals {res_r:e} / {res_l:e} exceed {PERRON_RESIDUAL:e}"
        )));
    }
    Ok(PerronPair { right: v, left: u, rho })
}

/// Positive vectors `xi = (mu I - M)^{-1} 1` and `eta = (mu I - M^T)^{-1} 1`,
/// which satisfy `M xi < mu xi` and `M^T eta < mu eta` entrywise whenever
/// `rho(M) < mu`.
pub fn subinvariant_vectors(m: &DMatrix<f64>, mu: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    check_nonnegative(m)?;
    let n = m.nrows();
    let ones = DVector::from_element(n, 1.0);
    let shifted = DMatrix::identity(n, n) * mu - m;
    let xi = shifted.clone().lu().solve(&ones).ok_or(Error::NearSingular { mu })?;
    let eta = shifted.transpose().lu().solve(&ones).ok_or(Error::NearSingular { mu })?;

    let positive = |v: &DVector<f64>| v.iter().all(|x| x.is_finite() && *x > 0.0);
    if !positive(&xi) || !positive(&eta) {
        return Err(Error::NearSingular { mu });
    }
    let slack_r = &xi * mu - m * &xi;
    let slack_l = &eta * mu - m.tr_mul(&eta);
    if slack_r.min() <= 0.0 || slack_l.min() <= 0.0 {
        return Err(Error::NearSingular { mu });
    }
    Ok((xi, eta))
}
