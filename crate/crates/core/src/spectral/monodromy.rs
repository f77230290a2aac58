use nalgebra::DMatrix;
use serde::Serialize;

use super::power::{spectral_radius, DEFAULT_TOL};
use crate::error::{Error, Result};

/// Relative agreement required between the spectral radii of the `p`
/// cyclic rotations of the period product.
pub const MONODROMY_SPREAD_TOL: f64 = 1e-9;

/// Tolerance for `Mtilde^p` against its block-diagonal assembly.
pub const LIFT_TOL: f64 = 1e-9;

/// The period products `M_{k+p:k} = M(k+p-1) ... M(k)` for every starting
/// phase `k`, with their spectral radii.
#[derive(Debug, Clone)]
pub struct MonodromySet {
    pub products: Vec<DMatrix<f64>>,
    pub rho: Vec<f64>,
}

impl MonodromySet {
    /// The common spectral radius (taken from `k = 0`).
    pub fn radius(&self) -> f64 {
        self.rho[0]
    }

    /// Largest relative deviation of `rho_k` from `rho_0`.
    pub fn relative_spread(&self) -> f64 {
        let r0 = self.rho[0];
        let denom = r0.max(f64::MIN_POSITIVE);
        self.rho.iter().map(|r| (r - r0).abs() / denom).fold(0.0, f64::max)
    }
}

/// Product of `ms[(start + len - 1) % p] ... ms[start]`.
pub fn period_product(ms: &[DMatrix<f64>], start: usize, len: usize) -> DMatrix<f64> {
    let p = ms.len();
    let n = ms[0].nrows();
    let mut acc = DMatrix::identity(n, n);
    for t in 0..len {
        acc = &ms[(start + t) % p] * acc;
    }
    acc
}

fn check_set(ms: &[DMatrix<f64>]) -> Result<usize> {
    let first = ms
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty matrix sequence".into()))?;
    let n = first.nrows();
    for m in ms {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
    }
    Ok(n)
}

/// Spectral radius of `M_{p:0}` only.
pub fn monodromy_radius(ms: &[DMatrix<f64>]) -> Result<f64> {
    check_set(ms)?;
    spectral_radius(&period_product(ms, 0, ms.len()), DEFAULT_TOL)
}

/// All cyclic period products and their radii, checking that the radii agree.
pub fn monodromy(ms: &[DMatrix<f64>]) -> Result<MonodromySet> {
    check_set(ms)?;
    let p = ms.len();
    let products: Vec<_> = (0..p).map(|k| period_product(ms, k, p)).collect();
    let rho = products
        .iter()
        .map(|prod| spectral_radius(prod, DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()?;
    let set = MonodromySet { products, rho };
    // The radii of nilpotent-like products are only resolved to the shift
    // accuracy, so compare against an absolute floor as well.
    let floor = 1e-12 * set.products.iter().map(|m| m.amax()).fold(1.0, f64::max);
    let r0 = set.rho[0];
    if let Some(bad) = set
        .rho
        .iter()
        .find(|r| (*r - r0).abs() > MONODROMY_SPREAD_TOL * r0 + floor)
    {
        return Err(Error::InvariantViolation(format!(
            "monodromy radii disagree across phases: {r0} vs {bad}"
        )));
    }
    Ok(set)
}

/// The `pn x pn` cyclic reformulation and its `p`-th power.
#[derive(Debug, Clone, Serialize)]
pub struct CyclicLift {
    #[serde(serialize_with = "crate::spectral::serialize_matrix")]
    pub mtilde: DMatrix<f64>,
    #[serde(serialize_with = "crate::spectral::serialize_matrix")]
    pub mtilde_p: DMatrix<f64>,
}

/// Assembles `Mtilde`: `M(p-1)` in the top-right block and `M(0), ...,
/// M(p-2)` on the block sub-diagonal, so that block `k+1` of `Mtilde z` is
/// `M(k) z_k`.
pub fn lift_matrix(ms: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let n = check_set(ms)?;
    let p = ms.len();
    let mut lift = DMatrix::zeros(p * n, p * n);
    for (k, m) in ms.iter().enumerate() {
        let row = ((k + 1) % p) * n;
        lift.view_mut((row, k * n), (n, n)).copy_from(m);
    }
    Ok(lift)
}

/// Block-diagonal matrix with the given square blocks.
pub fn block_diagonal(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(total, total);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), b.shape()).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Builds the lift, powers it by repeated multiplication and checks that the
/// power equals `blockdiag(M_{p:0}, M_{p+1:1}, ..., M_{2p-1:p-1})`.
pub fn cyclic_lift(ms: &[DMatrix<f64>]) -> Result<CyclicLift> {
    let mtilde = lift_matrix(ms)?;
    let p = ms.len();
    let mut mtilde_p = mtilde.clone();
    for _ in 1..p {
        mtilde_p = &mtilde * &mtilde_p;
    }
    let products: Vec<_> = (0..p).map(|k| period_product(ms, k, p)).collect();
    let expected = block_diagonal(&products);
    let scale = expected.amax().max(1.0);
    let err = (&mtilde_p - &expected).amax();
    if err > LIFT_TOL * scale {
        return Err(Error::InvariantViolation(format!(
            "lift power differs from monodromy blocks by {err:e}"
        )));
    }
    Ok(CyclicLift { mtilde, mtilde_p })
}

/// `rho(Mtilde)`, the `p`-th root of the monodromy radius.
pub fn lift_radius(monodromy_radius: f64, p: usize) -> f64 {
    monodromy_radius.powf(1.0 / p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mat(rows: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, rows)
    }

    fn pair() -> Vec<DMatrix<f64>> {
        vec![mat(&[0.9, 0.1, 0.1, 0.9]), mat(&[0.9, 0.2, 0.2, 0.9])]
    }

    #[test]
    fn single_phase_is_the_matrix() {
        let m = mat(&[0.95, 0.1, 0.1, 0.95]);
        let set = monodromy(std::slice::from_ref(&m)).unwrap();
        assert_eq!(set.products[0], m);
        assert_abs_diff_eq!(set.radius(), 1.05, epsilon = 1e-12);
        let lift = cyclic_lift(std::slice::from_ref(&m)).unwrap();
        assert_eq!(lift.mtilde, m);
    }

    #[test]
    fn two_phase_product_by_hand() {
        let set = monodromy(&pair()).unwrap();
        assert_abs_diff_eq!(set.products[0], mat(&[0.83, 0.27, 0.27, 0.83]), epsilon = 1e-15);
        assert_abs_diff_eq!(set.rho[0], 1.10, epsilon = 1e-12);
        assert_abs_diff_eq!(set.rho[1], 1.10, epsilon = 1e-12);
        assert!(set.relative_spread() < 1e-12);
    }

    #[test]
    fn identity_phases() {
        let ms = vec![DMatrix::identity(3, 3); 4];
        let set = monodromy(&ms).unwrap();
        for (prod, r) in set.products.iter().zip(&set.rho) {
            assert_eq!(prod, &DMatrix::identity(3, 3));
            assert_abs_diff_eq!(*r, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lift_layout_and_power() {
        let ms = pair();
        let lift = cyclic_lift(&ms).unwrap();
        // top-right block is M(1), bottom-left is M(0)
        assert_eq!(lift.mtilde.view((0, 2), (2, 2)).clone_owned(), ms[1]);
        assert_eq!(lift.mtilde.view((2, 0), (2, 2)).clone_owned(), ms[0]);
        assert_eq!(lift.mtilde.view((0, 0), (2, 2)).clone_owned(), DMatrix::zeros(2, 2));
        let rho = spectral_radius(&lift.mtilde, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(rho, 1.1f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(lift_radius(1.1, 2), 1.0488088481701516, epsilon = 1e-15);
    }

    #[test]
    fn zero_lift() {
        let ms = vec![DMatrix::zeros(2, 2); 3];
        let lift = cyclic_lift(&ms).unwrap();
        assert_eq!(lift.mtilde, DMatrix::zeros(6, 6));
        assert_eq!(spectral_radius(&lift.mtilde, DEFAULT_TOL).unwrap(), 0.0);
    }
}
