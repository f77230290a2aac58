//! Empirical convergence and limit-cycle detection on simulated trajectories.

use serde::{Deserialize, Serialize};

use crate::model::Trajectory;

/// Default agreement required between states one candidate period apart.
pub const DEFAULT_CYCLE_TOL: f64 = 1e-8;

/// Longest burn-in chosen automatically.
pub const MAX_BURN_IN: usize = 100_000;

/// Candidate periods tried by default, as multiples of `p`.
pub const DEFAULT_MAX_MULTIPLE: usize = 8;

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn two_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `||x||_inf < tol` at the end of the trajectory.
    pub converged: bool,
    /// First step with `||x||_inf < tol`.
    pub hitting_step: Option<usize>,
    /// Geometric mean of the per-period ratios of `||x||_2` over the second
    /// half of the run.
    pub empirical_rate: f64,
    /// `empirical_rate^(1/p)`.
    pub empirical_rate_per_step: f64,
}

/// Convergence statistics of `traj` at threshold `tol`.
pub fn detect_convergence(traj: &Trajectory, tol: f64) -> ConvergenceReport {
    let states = &traj.states;
    let p = traj.p.max(1);
    let hitting_step = states.iter().position(|x| inf_norm(x) < tol);
    let converged = states.last().is_some_and(|x| inf_norm(x) < tol);

    // Sample at multiples of p from the midpoint on and drop samples whose
    // norm has underflowed.
    let last = states.len().saturating_sub(1);
    let first = (last / 2).div_ceil(p) * p;
    let norms: Vec<f64> = (first..=last).step_by(p).map(|k| two_norm(&states[k])).collect();
    let usable: Vec<f64> = norms.iter().copied().take_while(|v| *v >= f64::MIN_POSITIVE).collect();
    let empirical_rate = match usable.len() {
        // the state vanished inside the window
        0 | 1 if usable.len() < norms.len() => 0.0,
        0 | 1 => f64::NAN,
        m => (usable[m - 1] / usable[0]).powf(1.0 / (m - 1) as f64),
    };
    ConvergenceReport {
        converged,
        hitting_step,
        empirical_rate,
        empirical_rate_per_step: empirical_rate.powf(1.0 / p as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub detected: bool,
    /// Cycle length in steps, a multiple of `p`.
    pub period: Option<usize>,
    /// One full cycle, starting at a step that is a multiple of `period`.
    pub states: Vec<Vec<f64>>,
    /// Step at which `states` begins.
    pub start_step: Option<usize>,
    pub burn_in: usize,
    /// Largest `||x(k+period) - x(k)||_inf` over the verification window.
    pub max_deviation: f64,
    /// The cycle is an equilibrium (all its states coincide within the tolerance).
    pub fixed_point: bool,
}

/// Burn-in `10 p / |1 - rho|`, capped at [`MAX_BURN_IN`].
pub fn default_burn_in(p: usize, rho: f64) -> usize {
    let gap = (1.0 - rho).abs();
    let steps = 10.0 * p as f64 / gap;
    if steps.is_finite() && steps < MAX_BURN_IN as f64 {
        steps.ceil() as usize
    } else {
        MAX_BURN_IN
    }
}

/// Looks for the smallest multiple `d` of `p` (up to `max_multiple p`) with
/// `||x(k+d) - x(k)||_inf <= cycle_tol` for every `k >= burn_in`.
pub fn detect_limit_cycle(
    traj: &Trajectory,
    p: usize,
    burn_in: usize,
    cycle_tol: f64,
    max_multiple: usize,
) -> CycleReport {
    let states = &traj.states;
    let len = states.len();
    let mut report = CycleReport {
        detected: false,
        period: None,
        states: Vec::new(),
        start_step: None,
        burn_in,
        max_deviation: f64::NAN,
        fixed_point: false,
    };
    let p = p.max(1);
    for m in 1..=max_multiple.max(1) {
        let d = m * p;
        if burn_in + 2 * d > len {
            break;
        }
        let mut worst = 0.0f64;
        let mut ok = true;
        for k in burn_in..len - d {
            let dev = states[k + d]
                .iter()
                .zip(&states[k])
                .fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
            worst = worst.max(dev);
            if !(dev <= cycle_tol) {
                ok = false;
                break;
            }
        }
        if ok {
            let start = (len - d) / d * d;
            let cycle: Vec<Vec<f64>> = states[start..start + d].to_vec();
            let fixed = cycle.iter().all(|x| {
                x.iter().zip(&cycle[0]).all(|(a, b)| (a - b).abs() <= cycle_tol)
            });
            report.detected = true;
            report.period = Some(d);
            report.states = cycle;
            report.start_step = Some(start);
            report.max_deviation = worst;
            report.fixed_point = fixed;
            return report;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_system_matrices, simulate, Edge, GraphPhase, PeriodicSchedule, StateVector};
    use approx::assert_abs_diff_eq;

    fn traj(states: Vec<Vec<f64>>, p: usize) -> Trajectory {
        let xbar = states.iter().map(|x| x.iter().sum::<f64>() / x.len() as f64).collect();
        Trajectory { p, start_phase: 0, states, xbar }
    }

    #[test]
    fn zero_trajectory() {
        let t = traj(vec![vec![0.0; 3]; 20], 2);
        let c = detect_convergence(&t, 1e-6);
        assert!(c.converged);
        assert_eq!(c.hitting_step, Some(0));
        assert_eq!(c.empirical_rate, 0.0);
        let cy = detect_limit_cycle(&t, 2, 4, DEFAULT_CYCLE_TOL, 4);
        assert!(cy.detected && cy.fixed_point);
        assert_eq!(cy.period, Some(2));
        assert!(cy.states.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn scalar_geometric_decay() {
        let ph = GraphPhase::new(vec![], vec![0.0], vec![0.5]);
        let mats = build_system_matrices(&PeriodicSchedule::new(1, 1.0, vec![ph], None).unwrap());
        let t = simulate(&mats, &StateVector::new(vec![1.0]).unwrap(), 200).unwrap();
        let c = detect_convergence(&t, 1e-6);
        assert!(c.converged);
        assert_eq!(c.hitting_step, Some(20));
        assert_abs_diff_eq!(c.empirical_rate, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn unstable_pair_settles_on_a_short_cycle() {
        let phase = |w: f64| {
            GraphPhase::new(vec![Edge::new(0, 1, w), Edge::new(1, 0, w)], vec![1.0; 2], vec![1.0; 2])
        };
        let s = PeriodicSchedule::new(2, 0.1, vec![phase(1.0), phase(2.0)], None).unwrap();
        let mats = build_system_matrices(&s);
        let t = simulate(&mats, &StateVector::new(vec![0.3, 0.0]).unwrap(), 12_000).unwrap();
        let c = detect_convergence(&t, 1e-6);
        assert!(!c.converged);
        assert!(c.empirical_rate >= 1.0 - 1e-9);
        let cy = detect_limit_cycle(&t, 2, 10_000, DEFAULT_CYCLE_TOL, 4);
        assert!(cy.detected);
        assert_eq!(2 % cy.period.unwrap(), 0);
        assert!(!cy.states[0].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn no_cycle_in_a_drifting_trajectory() {
        let states = (0..100).map(|k| vec![k as f64 * 1e-3]).collect();
        assert!(!detect_limit_cycle(&traj(states, 1), 1, 10, 1e-8, 4).detected);
    }

    #[test]
    fn burn_in_formula() {
        assert_eq!(default_burn_in(3, 0.7), 100);
        assert_eq!(default_burn_in(3, 1.3), 100);
        assert_eq!(default_burn_in(3, 1.0), MAX_BURN_IN);
    }
}
