//! Distributed healing-rate control.
//!
//! In a controlled phase node `i` heals at `delta_i(k) = sum_j bbar_ij(k) +
//! gamma_i`, which only needs the node's own incoming infection pressure.
//! With every phase controlled, `gamma_i > 0` and `h (sum_j bbar_ij + gamma_i)
//! <= 1`, each linearised matrix has row sums `1 - h gamma_i < 1` and the
//! disease-free state is exponentially stable; `gamma = 0` gives unit row
//! sums and `rho <= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_system_matrices, PeriodicSchedule};
use crate::spectral::monodromy_radius;
use crate::stability::{classify, Classification, ClassifyOptions};

/// Gain applied on top of the row sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Scalar(f64),
    PerNode(Vec<f64>),
}

impl GammaSpec {
    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        let gamma = match self {
            Self::Scalar(g) => vec![*g; n],
            Self::PerNode(v) if v.len() == n => v.clone(),
            Self::PerNode(v) => return Err(Error::DimensionMismatch { expected: n, found: v.len() }),
        };
        if let Some(g) = gamma.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::InvalidArgument(format!("gamma {g} must be finite and nonnegative")));
        }
        Ok(gamma)
    }
}

/// One violation of `h sum_j bbar_ij(k) + h gamma_i <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Infeasibility {
    pub phase: usize,
    pub node: usize,
    /// The left-hand side of the inequality.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPlan {
    pub gamma: Vec<f64>,
    pub controllable_phases: Vec<usize>,
    /// Healing rates of uncontrolled phases; `None` keeps the schedule's own.
    pub fallback_delta: Option<Vec<f64>>,
    /// `delta_i(k)` for every phase of the controlled schedule.
    pub synthesized_delta: Vec<Vec<f64>>,
    pub feasible: bool,
    pub infeasibilities: Vec<Infeasibility>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_monodromy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
}

impl ControlPlan {
    /// Whether every phase is controlled.
    pub fn full_phase(&self) -> bool {
        self.controllable_phases.len() == self.synthesized_delta.len()
    }

    /// Classifies the controlled schedule and stores the outcome in the plan.
    pub fn assess(&mut self, controlled: &PeriodicSchedule, opts: &ClassifyOptions) -> Result<()> {
        let report = classify(controlled, &build_system_matrices(controlled), opts)?;
        self.rho_monodromy = Some(report.rho_monodromy);
        self.classification = Some(report.classification);
        Ok(())
    }
}

fn normalise_phases(phases: &[usize], p: usize) -> Result<Vec<usize>> {
    let mut out = phases.to_vec();
    out.sort_unstable();
    out.dedup();
    if let Some(k) = out.iter().find(|k| **k >= p) {
        return Err(Error::InvalidArgument(format!("phase {k} out of range for period {p}")));
    }
    Ok(out)
}

/// Applies the control law in `controllable_phases` and `fallback_delta`
/// elsewhere. An infeasible gain is reported through the plan, never clipped.
pub fn synthesize(
    schedule: &PeriodicSchedule,
    gamma: &GammaSpec,
    controllable_phases: &[usize],
    fallback_delta: Option<&[f64]>,
) -> Result<(ControlPlan, PeriodicSchedule)> {
    let (n, p, h) = (schedule.n(), schedule.p(), schedule.h());
    let gamma = gamma.resolve(n)?;
    let controlled = normalise_phases(controllable_phases, p)?;
    if let Some(f) = fallback_delta {
        if f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.len() });
        }
    }

    let mut deltas = Vec::with_capacity(p);
    let mut infeasibilities = Vec::new();
    for (k, phase) in schedule.phases().iter().enumerate() {
        if controlled.binary_search(&k).is_ok() {
            let sums = phase.infection_row_sums();
            for (i, (s, g)) in sums.iter().zip(&gamma).enumerate() {
                let lhs = h * s + h * g;
                if lhs > 1.0 {
                    infeasibilities.push(Infeasibility { phase: k, node: i, value: lhs });
                }
            }
            deltas.push(sums.iter().zip(&gamma).map(|(s, g)| s + g).collect());
        } else {
            deltas.push(fallback_delta.map_or_else(|| phase.delta.clone(), <[f64]>::to_vec));
        }
    }
    let out = schedule.with_deltas(deltas.clone())?;
    let plan = ControlPlan {
        gamma,
        controllable_phases: controlled,
        fallback_delta: fallback_delta.map(<[f64]>::to_vec),
        synthesized_delta: deltas,
        feasible: infeasibilities.is_empty(),
        infeasibilities,
        rho_monodromy: None,
        classification: None,
    };
    Ok((plan, out))
}

/// Bisection bracket and target accuracy for [`minimal_gamma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSearch {
    pub lo: f64,
    pub hi: f64,
    /// Accepted `|rho(gamma*) - 1|`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl GammaSearch {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, tol: 1e-9, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalGamma {
    pub gamma: f64,
    pub rho: f64,
    /// Feasibility of the plan at `gamma`.
    pub feasible: bool,
    pub iterations: usize,
    pub rho_lo: f64,
    pub rho_hi: f64,
}

/// Monodromy radius of the schedule controlled with scalar `gamma`.
pub fn controlled_radius(
    schedule: &PeriodicSchedule,
    gamma: f64,
    controllable_phases: &[usize],
    fallback_delta: Option<&[f64]>,
) -> Result<f64> {
    let (_, controlled) = synthesize(schedule, &GammaSpec::Scalar(gamma), controllable_phases, fallback_delta)?;
    monodromy_radius(&build_system_matrices(&controlled).m)
}

/// Smallest homogeneous gain driving the monodromy radius to one, by
/// bisection on `rho(gamma) - 1`, which is non-increasing in `gamma`.
///
/// Requires `rho(lo) >= 1 >= rho(hi)` up to `tol`; otherwise the bracket is
/// rejected with [`Error::InvalidBracket`].
pub fn minimal_gamma(
    schedule: &PeriodicSchedule,
    controllable_phases: &[usize],
    fallback_delta: Option<&[f64]>,
    search: &GammaSearch,
) -> Result<MinimalGamma> {
    let GammaSearch { lo, hi, tol, max_iterations } = *search;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("bad gamma search [{lo}, {hi}] tol {tol}")));
    }
    let rho_at = |g: f64| controlled_radius(schedule, g, controllable_phases, fallback_delta);
    let feasible_at = |g: f64| -> Result<bool> {
        Ok(synthesize(schedule, &GammaSpec::Scalar(g), controllable_phases, fallback_delta)?.0.feasible)
    };
    let rho_lo = rho_at(lo)?;
    let rho_hi = rho_at(hi)?;
    let done = |gamma, rho, iterations| -> Result<MinimalGamma> {
        Ok(MinimalGamma { gamma, rho, feasible: feasible_at(gamma)?, iterations, rho_lo, rho_hi })
    };
    if (rho_lo - 1.0).abs() <= tol {
        return done(lo, rho_lo, 0);
    }
    if rho_hi > 1.0 + tol || rho_lo < 1.0 - tol {
        return Err(Error::InvalidBracket { rho_lo, rho_hi });
    }
    if (rho_hi - 1.0).abs() <= tol && hi == lo {
        return done(hi, rho_hi, 0);
    }

    let (mut a, mut b) = (lo, hi);
    let mut best = if (rho_hi - 1.0).abs() < (rho_lo - 1.0).abs() { (hi, rho_hi) } else { (lo, rho_lo) };
    for it in 1..=max_iterations {
        let mid = 0.5 * (a + b);
        let rho = rho_at(mid)?;
        if (rho - 1.0).abs() < (best.1 - 1.0).abs() {
            best = (mid, rho);
        }
        if (rho - 1.0).abs() <= tol {
            return done(mid, rho, it);
        }
        if rho > 1.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    if (best.1 - 1.0).abs() <= tol {
        done(best.0, best.1, max_iterations)
    } else {
        Err(Error::NonConvergence { iterations: max_iterations })
    }
}
