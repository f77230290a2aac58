//! System description, assumption checks and the discrete SIS update.

mod dynamics;
mod schedule;
mod validate;

pub use dynamics::{
    build_system_matrices, simulate, simulate_from, step, step_matrix_form, PhaseMatrices,
    Simulator, StateVector, SystemMatrices, Trajectory, STATE_TOLERANCE,
};
pub use schedule::{Edge, GraphPhase, PeriodicSchedule};
pub use validate::{validate_schedule, AssumptionCheck, ValidationReport, Violation, ASSUMPTION_SLACK};
