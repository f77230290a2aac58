//! The lifted time-invariant reformulation: one lifted step advances the
//! stacked state `y(pq) = [x(pq); x(pq+1); ...; x(pq+p-1)]` by a full period,
//! each block through the state-dependent matrices
//! `Mhat(k) = M(k mod p) - h X Bbar(k mod p)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{simulate, StateVector, SystemMatrices};

/// Evaluator for the lifted map `y -> Mbarbar(X) y`.
#[derive(Debug, Clone, Copy)]
pub struct LiftedSystem<'a> {
    mats: &'a SystemMatrices,
}

impl<'a> LiftedSystem<'a> {
    pub fn new(mats: &'a SystemMatrices) -> Self {
        Self { mats }
    }

    /// Length of the stacked state, `p n`.
    pub fn dim(&self) -> usize {
        self.mats.n * self.mats.p()
    }

    fn mhat_step(&self, x: &DVector<f64>, k: usize) -> DVector<f64> {
        let phase = self.mats.phase(k);
        let mut mhat = phase.m.clone();
        let n = x.len();
        for j in 0..n {
            for i in 0..n {
                mhat[(i, j)] -= self.mats.h * x[i] * phase.bbar[(i, j)];
            }
        }
        mhat * x
    }

    /// One lifted step. Block `i` is carried through phases `i, ..., i+p-1`.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (n, p) = (self.mats.n, self.mats.p());
        if y.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, found: y.len() });
        }
        let mut out = Vec::with_capacity(n * p);
        for i in 0..p {
            let mut x = DVector::from_column_slice(&y[i * n..(i + 1) * n]);
            for t in 0..p {
                x = self.mhat_step(&x, i + t);
            }
            out.extend(x.iter());
        }
        Ok(out)
    }

    /// Central-difference Jacobian of [`apply`](Self::apply) at `y = 0`.
    pub fn jacobian_at_zero(&self, step: f64) -> DMatrix<f64> {
        let dim = self.dim();
        let mut jac = DMatrix::zeros(dim, dim);
        let mut probe = vec![0.0; dim];
        for j in 0..dim {
            probe[j] = step;
            let plus = self.apply(&probe).expect("probe has lifted dimension");
            probe[j] = -step;
            let minus = self.apply(&probe).expect("probe has lifted dimension");
            probe[j] = 0.0;
            for i in 0..dim {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
            }
        }
        jac
    }
}

/// Stacks `x(0), ..., x(p-1)` of a direct simulation from `x0`.
pub fn stacked_prefix(mats: &SystemMatrices, x0: &StateVector) -> Result<Vec<f64>> {
    let traj = simulate(mats, x0, mats.p() - 1)?;
    Ok(traj.states.concat())
}

/// Iterates the lifted map `q_steps` times; returns `y(0), ..., y(p q_steps)`.
pub fn lifted_simulate(mats: &SystemMatrices, y0: &[f64], q_steps: usize) -> Result<Vec<Vec<f64>>> {
    let sys = LiftedSystem::new(mats);
    let mut out = Vec::with_capacity(q_steps + 1);
    out.push(y0.to_vec());
    for q in 0..q_steps {
        let next = sys.apply(&out[q])?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_system_matrices, step, Edge, GraphPhase, PeriodicSchedule};
    use crate::spectral::cyclic_lift;

    fn pair() -> SystemMatrices {
        let a0 = vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 0.5)];
        let a1 = vec![Edge::new(0, 1, 3.0)];
        let phases = vec![
            GraphPhase::new(a0, vec![1.0, 2.0], vec![0.5, 1.0]),
            GraphPhase::new(a1, vec![1.5, 0.0], vec![2.0, 0.3]),
        ];
        build_system_matrices(&PeriodicSchedule::new(2, 0.1, phases, None).unwrap())
    }

    #[test]
    fn zero_is_fixed() {
        let mats = pair();
        let ys = lifted_simulate(&mats, &[0.0; 4], 5).unwrap();
        assert!(ys.iter().all(|y| y.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn single_phase_is_step() {
        let ph = GraphPhase::new(vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)], vec![1.0; 2], vec![1.5; 2]);
        let mats = build_system_matrices(&PeriodicSchedule::new(2, 0.1, vec![ph], None).unwrap());
        let x = StateVector::new(vec![0.3, 0.8]).unwrap();
        let lifted = LiftedSystem::new(&mats).apply(x.as_slice()).unwrap();
        let direct = step(&x, mats.phase(0), mats.h).unwrap();
        for (a, b) in lifted.iter().zip(direct.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn blocks_follow_direct_simulation() {
        let mats = pair();
        let x0 = StateVector::new(vec![0.9, 0.2]).unwrap();
        let y0 = stacked_prefix(&mats, &x0).unwrap();
        let ys = lifted_simulate(&mats, &y0, 10).unwrap();
        let traj = simulate(&mats, &x0, 2 * 10 + 1).unwrap();
        for (q, y) in ys.iter().enumerate() {
            for i in 0..2 {
                for node in 0..2 {
                    let diff = (y[i * 2 + node] - traj.states[2 * q + i][node]).abs();
                    assert!(diff < 1e-14, "q={q} block={i} diff={diff}");
                }
            }
        }
    }

    #[test]
    fn jacobian_is_lift_power() {
        let mats = pair();
        let jac = LiftedSystem::new(&mats).jacobian_at_zero(1e-6);
        let lift = cyclic_lift(&mats.m).unwrap();
        assert!((jac - lift.mtilde_p).amax() < 1e-8);
    }
}
