//! Diagonal Lyapunov certificates for the linearised periodic system.
//!
//! A certificate is a `p`-periodic family of positive diagonal matrices
//! `P(k)` with `M(k)^T P(k+1) M(k) - P(k)` negative definite (strict mode)
//! or negative semidefinite (boundary mode). It is obtained as one diagonal
//! `Q` on the cyclic lift, whose diagonal blocks are the `P(k)`.
//!
//! * Strict (`rho(Mtilde) < 1`): with `mu = (1 + rho)/2`, take the
//!   sub-invariant vectors `xi`, `eta` of `Mtilde` and `Q = diag(eta / xi)`.
//!   Cauchy-Schwarz gives `Mtilde^T Q Mtilde <= mu^2 Q`.
//! * Semidefinite (`rho(Mtilde) = 1`, `Mtilde` irreducible): `Q = diag(u / v)`
//!   from the left/right Perron vectors of `Mtilde`.
//!
//! Both are checked a posteriori; the stored `defect` is the largest
//! eigenvalue of any `M(k)^T P(k+1) M(k) - P(k)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemMatrices;
use crate::spectral::{
    is_irreducible, lift_matrix, lift_radius, monodromy_radius, period_product, perron_vectors,
    subinvariant_vectors,
};

/// Largest defect accepted in semidefinite mode (certificates are scaled to
/// max entry 1).
pub const SEMIDEFINITE_DEFECT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    Strict,
    Semidefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCertificate {
    pub mode: CertificateMode,
    /// Diagonal of `P(k)` for each phase `k`; `P(p) = P(0)`.
    pub p: Vec<Vec<f64>>,
    pub defect: f64,
    /// Contraction factor used in strict mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

impl LyapunovCertificate {
    /// `V(k, x) = x^T P(k mod p) x`.
    pub fn value(&self, k: usize, x: &[f64]) -> f64 {
        let d = &self.p[k % self.p.len()];
        d.iter().zip(x).map(|(w, xi)| w * xi * xi).sum()
    }
}

/// `M(k)^T P(k+1) M(k) - P(k)` for every phase, symmetrised.
pub(crate) fn decrease_matrices(mats: &SystemMatrices, p: &[Vec<f64>]) -> Vec<DMatrix<f64>> {
    let period = mats.p();
    (0..period)
        .map(|k| {
            let next = DVector::from_column_slice(&p[(k + 1) % period]);
            let m = &mats.m[k];
            let mut weighted = m.clone();
            for (mut row, w) in weighted.row_iter_mut().zip(next.iter()) {
                row *= *w;
            }
            let mut s = m.tr_mul(&weighted);
            for (i, w) in p[k].iter().enumerate() {
                s[(i, i)] -= w;
            }
            (&s + s.transpose()) * 0.5
        })
        .collect()
}

pub(crate) fn extreme_eigenvalues(s: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(s.clone());
    (eig.eigenvalues.min(), eig.eigenvalues.max())
}

/// Largest eigenvalue over all per-phase decrease matrices.
pub fn certificate_defect(mats: &SystemMatrices, p: &[Vec<f64>]) -> f64 {
    decrease_matrices(mats, p)
        .iter()
        .map(|s| extreme_eigenvalues(s).1)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn split_blocks(q: &DVector<f64>, n: usize, p: usize) -> Vec<Vec<f64>> {
    let scale = q.max();
    (0..p)
        .map(|k| q.rows(k * n, n).iter().map(|v| v / scale).collect())
        .collect()
}

fn strict_attempt(mats: &SystemMatrices, lift: &DMatrix<f64>, mu: f64) -> Result<LyapunovCertificate> {
    let (xi, eta) = subinvariant_vectors(lift, mu)?;
    let q = eta.component_div(&xi);
    let p = split_blocks(&q, mats.n, mats.p());
    let defect = certificate_defect(mats, &p);
    if !(defect < 0.0) {
        return Err(Error::CertificateFailed { defect });
    }
    Ok(LyapunovCertificate { mode: CertificateMode::Strict, p, defect, mu: Some(mu) })
}

/// Strict certificate; requires `rho(Mtilde) < 1`. Retries once with a
/// contraction factor closer to one.
pub fn strict_certificate(mats: &SystemMatrices) -> Result<LyapunovCertificate> {
    let rho = lift_radius(monodromy_radius(&mats.m)?, mats.p());
    if rho >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "strict certificate needs rho(Mtilde) < 1, got {rho}"
        )));
    }
    let lift = lift_matrix(&mats.m)?;
    strict_attempt(mats, &lift, 0.5 * (1.0 + rho))
        .or_else(|_| strict_attempt(mats, &lift, 0.25 * (3.0 + rho)))
}

/// Right/left Perron vectors of the lift, assembled from those of the period
/// product `M_{p:0}`: `v_{k+1} = M(k) v_k / r` and `u_k = M(k)^T u_{k+1} / r`
/// with `r = rho(Mtilde)`.
fn lift_perron_vectors(mats: &SystemMatrices, lift: &DMatrix<f64>) -> Result<(DVector<f64>, DVector<f64>, f64)> {
    let (n, p) = (mats.n, mats.p());
    let pair = match perron_vectors(&period_product(&mats.m, 0, p)) {
        Ok(pair) => pair,
        // the period product can be reducible while the lift is not
        Err(_) => {
            let direct = perron_vectors(lift)?;
            return Ok((direct.right, direct.left, direct.rho));
        }
    };
    let r = lift_radius(pair.rho, p);
    if r <= 0.0 {
        return Err(Error::Reducible);
    }
    let mut v = vec![pair.right];
    for k in 0..p - 1 {
        let next = &mats.m[k] * &v[k] / r;
        v.push(next);
    }
    let mut u = vec![DVector::zeros(n); p];
    u[0] = pair.left;
    for k in (1..p).rev() {
        u[k] = mats.m[k].tr_mul(&u[(k + 1) % p]) / r;
    }
    let stack = |parts: &[DVector<f64>]| {
        DVector::from_iterator(n * p, parts.iter().flat_map(|b| b.iter().copied()))
    };
    Ok((stack(&v), stack(&u), r))
}

/// Semidefinite certificate for the boundary case `rho(Mtilde) = 1`;
/// requires the lift to be irreducible.
pub fn semidefinite_certificate(mats: &SystemMatrices) -> Result<LyapunovCertificate> {
    let lift = lift_matrix(&mats.m)?;
    if !is_irreducible(&lift) {
        return Err(Error::Reducible);
    }
    let (v, u, r) = lift_perron_vectors(mats, &lift)?;
    if v.min() <= 0.0 || u.min() <= 0.0 {
        return Err(Error::InvariantViolation("lift Perron vectors are not positive".into()));
    }
    let vs = &v / v.max();
    let us = &u / u.max();
    let res_r = (&lift * &vs - &vs * r).amax();
    let res_l = (lift.tr_mul(&us) - &us * r).amax();
    if res_r > 1e-9 || res_l > 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "lift Perron residuals {res_r:e} / {res_l:e}"
        )));
    }
    let q = u.component_div(&v);
    let p = split_blocks(&q, mats.n, mats.p());
    let defect = certificate_defect(mats, &p);
    if defect > SEMIDEFINITE_DEFECT_TOL {
        return Err(Error::CertificateFailed { defect });
    }
    Ok(LyapunovCertificate { mode: CertificateMode::Semidefinite, p, defect, mu: None })
}

/// Builds a certificate in the mode dictated by the monodromy radius:
/// strict below `1 - tol_eq`, semidefinite within `tol_eq` of one.
pub fn lyapunov_certificate(mats: &SystemMatrices, tol_eq: f64) -> Result<LyapunovCertificate> {
    let rho = monodromy_radius(&mats.m)?;
    if rho < 1.0 - tol_eq {
        strict_certificate(mats)
    } else if rho <= 1.0 + tol_eq {
        semidefinite_certificate(mats)
    } else {
        Err(Error::InvalidArgument(format!(
            "no diagonal certificate exists for monodromy radius {rho} > 1"
        )))
    }
}
