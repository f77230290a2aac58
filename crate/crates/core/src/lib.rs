//! Discrete-time periodic SIS epidemics on directed weighted graphs.
//!
//! The crate is organised around the life cycle of an analysis:
//!
//! * [`model`] holds the periodic schedule, checks the standing assumptions
//!   and runs the Euler-discretised SIS update.
//! * [`spectral`] is the nonnegative-matrix kernel: Perron roots, Perron and
//!   sub-invariant vectors, strong connectivity, monodromy products, the
//!   cyclic lift and joint-spectral-radius bounds.
//! * [`stability`] classifies the disease-free equilibrium, builds diagonal
//!   Lyapunov certificates with a convergence-rate bound, and evaluates the
//!   lifted time-invariant map.
//! * [`control`] synthesises distributed healing rates and searches for the
//!   minimal homogeneous gain.
//! * [`experiments`] generates synthetic networks, detects convergence and
//!   limit cycles, runs parameter sweeps and writes reports.

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod experiments;
pub mod model;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use model::{
    build_system_matrices, simulate, step, validate_schedule, Edge, GraphPhase, PeriodicSchedule,
    StateVector, SystemMatrices, Trajectory, ValidationReport,
};
pub use stability::{classify, Classification, ClassifyOptions, StabilityReport};

/// Version tag carried by every JSON report and schedule written by the tools.
pub const FORMAT_VERSION: &str = "1";
