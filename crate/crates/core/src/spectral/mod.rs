//! Nonnegative-matrix kernel shared by the analysis and control code.

pub mod jsr;
pub mod monodromy;
pub mod power;
pub mod scc;

pub use jsr::{jsr_bounds, jsr_bounds_with_budget, JsrBounds, LengthBound, DEFAULT_PRODUCT_BUDGET};
pub use monodromy::{
    block_diagonal, cyclic_lift, lift_matrix, lift_radius, monodromy, monodromy_radius,
    period_product, CyclicLift, MonodromySet,
};
pub use power::{
    dense_spectral_radius, perron_vectors, power_spectral_radius, spectral_radius,
    subinvariant_vectors, PerronPair, DEFAULT_TOL,
};
pub use scc::{is_irreducible, strongly_connected, strongly_connected_components, support_components};

use nalgebra::DMatrix;
use serde::Serializer;

/// Row-major nested arrays.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn serialize_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(matrix_rows(m))
}
