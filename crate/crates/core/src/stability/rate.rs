//! Convergence-rate bound from a strict certificate.
//!
//! With `sigma1 <= P(k) <= sigma2` and `P(k) - M(k)^T P(k+1) M(k) >= sigma3 I`
//! for every `k`, the Lyapunov function contracts by `1 - sigma3/sigma2` per
//! step, so `||x(k)|| <= sqrt(sigma2/sigma1) ||x(0)|| rate^k` with
//! `rate = sqrt(1 - sigma3/sigma2)`.

use serde::{Deserialize, Serialize};

use super::certificate::{decrease_matrices, extreme_eigenvalues, CertificateMode, LyapunovCertificate};
use crate::error::{Error, Result};
use crate::model::SystemMatrices;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub sigma1: f64,
    pub sigma2: f64,
    /// `max_k lambda_min(P(k) - M(k)^T P(k+1) M(k))`.
    pub sigma3: f64,
    /// `min_k` of the same quantity; the value the rate is built from.
    pub sigma3_conservative: f64,
    pub rate: f64,
    /// `sqrt(1 - sigma3/sigma2)`, not a valid bound in general.
    pub rate_paper_form: f64,
    /// Overshoot constant `sqrt(sigma2/sigma1)`.
    pub alpha: f64,
}

impl RateBound {
    /// Upper bound on `||x(k)||_2` given `||x(0)||_2`.
    pub fn envelope(&self, x0_norm: f64, k: usize) -> f64 {
        self.alpha * x0_norm * self.rate.powi(k as i32)
    }

    /// Smallest `k` at which the envelope falls below `target`, if the rate
    /// is below one.
    pub fn horizon(&self, x0_norm: f64, target: f64) -> Option<usize> {
        let start = self.alpha * x0_norm;
        if start <= target {
            return Some(0);
        }
        if self.rate <= 0.0 {
            return Some(1);
        }
        if self.rate >= 1.0 {
            return None;
        }
        let k = ((target / start).ln() / self.rate.ln()).ceil();
        (k.is_finite() && k < usize::MAX as f64).then_some(k as usize)
    }
}

fn contraction(sigma3: f64, sigma2: f64) -> f64 {
    (1.0 - sigma3 / sigma2).clamp(0.0, 1.0).sqrt()
}

pub fn rate_bound(cert: &LyapunovCertificate, mats: &SystemMatrices) -> Result<RateBound> {
    if cert.mode != CertificateMode::Strict {
        return Err(Error::InvalidArgument("rate bound needs a strict certificate".into()));
    }
    let entries = || cert.p.iter().flatten().copied();
    let sigma1 = entries().fold(f64::INFINITY, f64::min);
    let sigma2 = entries().fold(0.0, f64::max);
    if !(sigma1 > 0.0) {
        return Err(Error::InvariantViolation(format!("certificate entry {sigma1} is not positive")));
    }
    let mins: Vec<f64> = decrease_matrices(mats, &cert.p)
        .iter()
        .map(|s| -extreme_eigenvalues(s).1)
        .collect();
    let sigma3 = mins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sigma3_conservative = mins.iter().copied().fold(f64::INFINITY, f64::min);
    if !(sigma3_conservative > 0.0) {
        return Err(Error::NotStrict { sigma3: sigma3_conservative });
    }
    if sigma3_conservative > sigma2 * (1.0 + 1e-12) {
        return Err(Error::InvariantViolation(format!(
            "sigma3 {sigma3_conservative} exceeds sigma2 {sigma2}"
        )));
    }
    Ok(RateBound {
        sigma1,
        sigma2,
        sigma3,
        sigma3_conservative,
        rate: contraction(sigma3_conservative, sigma2),
        rate_paper_form: contraction(sigma3, sigma2),
        alpha: (sigma2 / sigma1).sqrt(),
    })
}
