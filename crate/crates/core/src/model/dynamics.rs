use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::validate::ASSUMPTION_SLACK;
use super::PeriodicSchedule;
use crate::error::{Error, Result};

/// Entries of a state may drift this far outside `[0, 1]` and still be
/// accepted (after clamping).
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Infection levels of all nodes at one instant, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    /// Validates `values` against `[0, 1]`, clamping drift up to
    /// [`STATE_TOLERANCE`].
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        for (index, v) in values.iter_mut().enumerate() {
            if !(v.is_finite() && *v >= -STATE_TOLERANCE && *v <= 1.0 + STATE_TOLERANCE) {
                return Err(Error::StateOutOfRange { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Population average `(1/n) sum_i x_i`.
    pub fn mean(&self) -> f64 {
        mean(&self.0)
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// Dense per-phase matrices derived from a schedule.
///
/// * `bbar[k] = B(k) A(k)` with entries `beta_i a_ij`,
/// * `m[k] = I - h D(k) + h Bbar(k)`, the linearisation at the disease-free state,
/// * `hdelta[k]` the diagonal of `h D(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub n: usize,
    pub h: f64,
    pub bbar: Vec<DMatrix<f64>>,
    pub delta: Vec<DVector<f64>>,
    pub hdelta: Vec<DVector<f64>>,
    pub m: Vec<DMatrix<f64>>,
}

/// Borrowed view of one phase of a [`SystemMatrices`].
#[derive(Debug, Clone, Copy)]
pub struct PhaseMatrices<'a> {
    pub bbar: &'a DMatrix<f64>,
    pub delta: &'a DVector<f64>,
    pub m: &'a DMatrix<f64>,
}

impl SystemMatrices {
    pub fn p(&self) -> usize {
        self.m.len()
    }

    /// Matrices of the phase active at absolute step `t`.
    pub fn phase(&self, t: usize) -> PhaseMatrices<'_> {
        let k = t % self.p();
        PhaseMatrices { bbar: &self.bbar[k], delta: &self.delta[k], m: &self.m[k] }
    }
}

pub fn build_system_matrices(schedule: &PeriodicSchedule) -> SystemMatrices {
    let n = schedule.n();
    let h = schedule.h();
    let mut out = SystemMatrices {
        n,
        h,
        bbar: Vec::with_capacity(schedule.p()),
        delta: Vec::with_capacity(schedule.p()),
        hdelta: Vec::with_capacity(schedule.p()),
        m: Vec::with_capacity(schedule.p()),
    };
    for phase in schedule.phases() {
        let mut bbar = DMatrix::zeros(n, n);
        for e in &phase.adjacency {
            bbar[(e.target, e.source)] = phase.beta[e.target] * e.weight;
        }
        let delta = DVector::from_column_slice(&phase.delta);
        let hdelta = &delta * h;
        let mut m = &bbar * h;
        for i in 0..n {
            m[(i, i)] += 1.0 - hdelta[i];
            // h delta_i = 1 can round to just above one
            if (-ASSUMPTION_SLACK..0.0).contains(&m[(i, i)]) {
                m[(i, i)] = 0.0;
            }
        }
        out.bbar.push(bbar);
        out.delta.push(delta);
        out.hdelta.push(hdelta);
        out.m.push(m);
    }
    out
}

/// Componentwise SIS update, written exactly as
/// `x_i + h((1 - x_i) sum_j bbar_ij x_j - delta_i x_i)`.
pub(crate) fn step_into(x: &[f64], phase: PhaseMatrices<'_>, h: f64, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut pressure = 0.0;
        for (j, xj) in x.iter().enumerate() {
            pressure += phase.bbar[(i, j)] * xj;
        }
        *o = x[i] + h * ((1.0 - x[i]) * pressure - phase.delta[i] * x[i]);
    }
}

/// One Euler step of the SIS dynamics from `x` under `phase`.
///
/// The disease-free state maps to itself bit for bit. Inputs must lie in
/// `[0, 1]` up to [`STATE_TOLERANCE`].
pub fn step(x: &StateVector, phase: PhaseMatrices<'_>, h: f64) -> Result<StateVector> {
    let n = phase.m.nrows();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let x = StateVector::new(x.0.clone())?;
    let mut out = vec![0.0; n];
    step_into(x.as_slice(), phase, h, &mut out);
    Ok(StateVector(out))
}

/// The same update in matrix form, `x' = (M - h X Bbar) x`.
pub fn step_matrix_form(x: &[f64], phase: PhaseMatrices<'_>, h: f64) -> Vec<f64> {
    let xv = DVector::from_column_slice(x);
    let linear = phase.m * &xv;
    let pressure = phase.bbar * &xv;
    linear
        .iter()
        .zip(pressure.iter())
        .zip(x)
        .map(|((l, s), xi)| l - h * xi * s)
        .collect()
}

/// Iterates the dynamics one step at a time without storing history.
pub struct Simulator<'a> {
    mats: &'a SystemMatrices,
    t: usize,
    x: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Simulator<'a> {
    /// Starts at absolute time `t0`, so the first step uses phase `t0 mod p`.
    pub fn new(mats: &'a SystemMatrices, x0: &StateVector, t0: usize) -> Result<Self> {
        if x0.len() != mats.n {
            return Err(Error::DimensionMismatch { expected: mats.n, found: x0.len() });
        }
        Ok(Self { mats, t: t0, x: x0.0.clone(), scratch: vec![0.0; mats.n] })
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn advance(&mut self) -> &[f64] {
        step_into(&self.x, self.mats.phase(self.t), self.mats.h, &mut self.scratch);
        std::mem::swap(&mut self.x, &mut self.scratch);
        self.t += 1;
        &self.x
    }
}

/// States `x(0), ..., x(steps)` together with their averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub p: usize,
    /// Phase applied at the first step.
    pub start_phase: usize,
    pub states: Vec<Vec<f64>>,
    pub xbar: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }
}

/// Runs `steps` steps from `x0`; step `k` applies phase `k mod p`.
pub fn simulate(mats: &SystemMatrices, x0: &StateVector, steps: usize) -> Result<Trajectory> {
    simulate_from(mats, x0, 0, steps)
}

/// Like [`simulate`] but the first step uses phase `start_phase mod p`.
pub fn simulate_from(
    mats: &SystemMatrices,
    x0: &StateVector,
    start_phase: usize,
    steps: usize,
) -> Result<Trajectory> {
    let mut sim = Simulator::new(mats, x0, start_phase)?;
    let mut states = Vec::with_capacity(steps + 1);
    let mut xbar = Vec::with_capacity(steps + 1);
    states.push(sim.state().to_vec());
    xbar.push(mean(sim.state()));
    for _ in 0..steps {
        let x = sim.advance();
        xbar.push(mean(x));
        states.push(x.to_vec());
    }
    Ok(Trajectory { p: mats.p(), start_phase: start_phase % mats.p(), states, xbar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, GraphPhase};
    use approx::assert_abs_diff_eq;

    fn two_node(delta: f64) -> PeriodicSchedule {
        let ph = GraphPhase::new(
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)],
            vec![1.0, 1.0],
            vec![delta, delta],
        );
        PeriodicSchedule::new(2, 0.1, vec![ph], None).unwrap()
    }

    fn scalar_decay() -> SystemMatrices {
        let ph = GraphPhase::new(vec![], vec![0.0], vec![0.5]);
        build_system_matrices(&PeriodicSchedule::new(1, 1.0, vec![ph], None).unwrap())
    }

    #[test]
    fn m_matrix_of_two_node_example() {
        let mats = build_system_matrices(&two_node(0.5));
        let expected = DMatrix::from_row_slice(2, 2, &[0.95, 0.1, 0.1, 0.95]);
        assert_abs_diff_eq!(mats.m[0], expected, epsilon = 1e-15);
    }

    #[test]
    fn identity_and_zero_cases() {
        let id = GraphPhase::new(vec![], vec![1.0; 3], vec![0.0; 3]);
        let mats = build_system_matrices(&PeriodicSchedule::new(3, 0.3, vec![id], None).unwrap());
        assert_eq!(mats.m[0], DMatrix::identity(3, 3));

        let heal = GraphPhase::new(vec![Edge::new(0, 1, 1.0)], vec![0.0; 2], vec![4.0; 2]);
        let mats = build_system_matrices(&PeriodicSchedule::new(2, 0.25, vec![heal], None).unwrap());
        assert_eq!(mats.m[0], DMatrix::zeros(2, 2));
    }

    #[test]
    fn step_examples() {
        let mats = build_system_matrices(&two_node(0.5));
        let zero = step(&StateVector::zeros(2), mats.phase(0), mats.h).unwrap();
        assert!(zero.as_slice().iter().all(|v| v.to_bits() == 0));

        let x = StateVector::new(vec![1.0, 0.0]).unwrap();
        let next = step(&x, mats.phase(0), mats.h).unwrap();
        assert_abs_diff_eq!(next.as_slice()[0], 0.95, epsilon = 1e-15);
        assert_abs_diff_eq!(next.as_slice()[1], 0.1, epsilon = 1e-15);

        let scalar = scalar_decay();
        let one = step(&StateVector::new(vec![1.0]).unwrap(), scalar.phase(0), scalar.h).unwrap();
        assert_eq!(one.as_slice(), &[0.5]);
    }

    #[test]
    fn step_rejects_out_of_range_state() {
        let mats = build_system_matrices(&two_node(0.5));
        let bad = StateVector(vec![1.5, 0.0]);
        assert!(matches!(
            step(&bad, mats.phase(0), mats.h),
            Err(Error::StateOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn state_tolerance_clamps_small_drift() {
        let s = StateVector::new(vec![-1e-13, 1.0 + 1e-13, 0.5]).unwrap();
        assert_eq!(s.as_slice(), &[0.0, 1.0, 0.5]);
        assert!(StateVector::new(vec![-1e-9]).is_err());
        assert!(StateVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn geometric_decay_trajectory() {
        let traj = simulate(&scalar_decay(), &StateVector::new(vec![1.0]).unwrap(), 3).unwrap();
        let xs: Vec<f64> = traj.states.iter().map(|s| s[0]).collect();
        assert_eq!(xs, vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(traj.xbar, xs);
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let traj = simulate(&build_system_matrices(&two_node(0.1)), &StateVector::zeros(2), 100).unwrap();
        assert_eq!(traj.len(), 101);
        assert!(traj.states.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn matrix_form_matches_componentwise_form() {
        let mats = build_system_matrices(&two_node(0.7));
        let x = [0.3, 0.9];
        let mut a = [0.0; 2];
        step_into(&x, mats.phase(0), mats.h, &mut a);
        let b = step_matrix_form(&x, mats.phase(0), mats.h);
        for (u, v) in a.iter().zip(&b) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-15);
        }
    }
}
