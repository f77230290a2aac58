use serde::{Deserialize, Serialize};

use super::PeriodicSchedule;
use crate::error::{Error, Result};
use crate::spectral::scc::strongly_connected;

/// Slack allowed on the `<= 1` bounds so that rates synthesized to sit exactly
/// on the boundary survive rounding.
pub const ASSUMPTION_SLACK: f64 = 1e-12;

/// One failing item of an assumption check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub phase: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl AssumptionCheck {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self { passed: violations.is_empty(), violations }
    }
}

/// Outcome of checking a schedule against the standing assumptions.
///
/// * `a1` periodicity (structural, always holds for a [`PeriodicSchedule`]),
/// * `a2` nonnegative healing and infection terms,
/// * `a3` `h*delta_i <= 1` and `h*sum_j beta_i a_ij <= 1`,
/// * `a4` every phase has an infection edge between distinct nodes,
/// * `a5` every phase graph is strongly connected.
///
/// `a1`-`a3` are what exponential-stability claims need; `a4`/`a5` only
/// matter for claims at the boundary `rho = 1` and for instability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub a1: AssumptionCheck,
    pub a2: AssumptionCheck,
    pub a3: AssumptionCheck,
    pub a4: AssumptionCheck,
    pub a5: AssumptionCheck,
}

impl ValidationReport {
    /// A1-A3 hold: the model is well defined and linear analysis applies.
    pub fn well_posed(&self) -> bool {
        self.a1.passed && self.a2.passed && self.a3.passed
    }

    /// A4 and A5 hold in every phase.
    pub fn connectivity_ok(&self) -> bool {
        self.a4.passed && self.a5.passed
    }
}

/// Checks assumptions A1-A5 phase by phase. In `strict` mode a failure of
/// A2 or A3 is returned as an error instead of being reported.
pub fn validate_schedule(schedule: &PeriodicSchedule, strict: bool) -> Result<ValidationReport> {
    let h = schedule.h();
    let n = schedule.n();
    let (mut a2, mut a3, mut a4, mut a5) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());

    for (k, phase) in schedule.phases().iter().enumerate() {
        for (i, &d) in phase.delta.iter().enumerate() {
            if h * d < 0.0 {
                a2.push(Violation { phase: k, node: Some(i), detail: format!("h*delta = {}", h * d) });
            }
            if h * d > 1.0 + ASSUMPTION_SLACK {
                a3.push(Violation { phase: k, node: Some(i), detail: format!("h*delta = {}", h * d) });
            }
        }
        for e in &phase.adjacency {
            let b = phase.beta[e.target] * e.weight;
            if b < 0.0 {
                a2.push(Violation {
                    phase: k,
                    node: Some(e.target),
                    detail: format!("beta_bar[{}][{}] = {b}", e.target, e.source),
                });
            }
        }
        for (i, s) in phase.infection_row_sums().into_iter().enumerate() {
            if h * s > 1.0 + ASSUMPTION_SLACK {
                a3.push(Violation {
                    phase: k,
                    node: Some(i),
                    detail: format!("h*sum_j beta_bar = {}", h * s),
                });
            }
        }
        let spreads = phase
            .adjacency
            .iter()
            .any(|e| e.target != e.source && phase.beta[e.target] * e.weight > 0.0);
        if !spreads {
            a4.push(Violation {
                phase: k,
                node: None,
                detail: "no infection edge between distinct nodes".into(),
            });
        }
        if !strongly_connected(n, &phase.adjacency) {
            a5.push(Violation { phase: k, node: None, detail: "graph is not strongly connected".into() });
        }
    }

    let report = ValidationReport {
        a1: AssumptionCheck::from_violations(Vec::new()),
        a2: AssumptionCheck::from_violations(a2),
        a3: AssumptionCheck::from_violations(a3),
        a4: AssumptionCheck::from_violations(a4),
        a5: AssumptionCheck::from_violations(a5),
    };
    if strict {
        for (name, check) in [("A2", &report.a2), ("A3", &report.a3)] {
            if let Some(v) = check.violations.first() {
                return Err(Error::AssumptionViolated {
                    assumption: name,
                    detail: format!("phase {}: {}", v.phase, v.detail),
                });
            }
        }
    }
    Ok(report)
}
