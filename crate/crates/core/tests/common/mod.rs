//! Shared fixtures for the integration suites: a seeded corpus of valid
//! schedules and an eigenvalue oracle independent of the library.

#![allow(dead_code)]

use nalgebra::DMatrix;
use periodic_sis::{Edge, GraphPhase, PeriodicSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random schedule satisfying A2-A3 with `n <= n_max`, `p <= p_max`.
///
/// Half the draws sit on a bidirectional ring so that A4/A5 hold; healing
/// rates are drawn relative to the infection pressure, which spreads the
/// monodromy radius on both sides of one.
pub fn random_schedule<R: Rng>(rng: &mut R, n_max: usize, p_max: usize) -> PeriodicSchedule {
    let n = rng.gen_range(1..=n_max);
    let p = rng.gen_range(1..=p_max);
    let ring = rng.gen_bool(0.5);
    let density = rng.gen_range(0.0..0.4);
    let healing = rng.gen_range(0.3..2.0);

    let mut phases = Vec::with_capacity(p);
    for _ in 0..p {
        let mut adjacency = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let neighbour = ring && n > 1 && (j == (i + 1) % n || i == (j + 1) % n) && i != j;
                if neighbour || (i != j && rng.gen_bool(density)) {
                    adjacency.push(Edge::new(i, j, rng.gen_range(0.1..5.0)));
                }
            }
        }
        let beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let mut sums = vec![0.0; n];
        for e in &adjacency {
            sums[e.target] += beta[e.target] * e.weight;
        }
        let mean = sums.iter().sum::<f64>() / n as f64;
        let delta = (0..n)
            .map(|i| healing * (0.5 * sums[i] + 0.5 * mean) * rng.gen_range(0.8..1.2) + rng.gen_range(0.0..0.1))
            .collect();
        phases.push(GraphPhase::new(adjacency, beta, delta));
    }
    let worst = phases
        .iter()
        .flat_map(|ph| {
            let sums = ph.infection_row_sums();
            ph.delta.iter().copied().chain(sums).collect::<Vec<_>>()
        })
        .fold(1e-3, f64::max);
    let h = rng.gen_range(0.2..0.95) / worst;
    PeriodicSchedule::new(n, h, phases, None).expect("generated schedule is well formed")
}

pub fn corpus(seed: u64, count: usize, n_max: usize, p_max: usize) -> Vec<PeriodicSchedule> {
    let mut r = rng(seed);
    (0..count).map(|_| random_schedule(&mut r, n_max, p_max)).collect()
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect()
}

/// Random nonzero state in `[0, 1]^n`.
pub fn random_nonzero_state<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let x = random_state(rng, n);
        if x.iter().any(|v| *v > 1e-3) {
            return x;
        }
    }
}

/// Euclidean norm, scaled so that tiny states do not underflow.
pub fn norm2(x: &[f64]) -> f64 {
    let scale = norm_inf(x);
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct C(f64, f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: C) -> C {
        let d = o.0 * o.0 + o.1 * o.1;
        C((self.0 * o.0 + self.1 * o.1) / d, (self.1 * o.0 - self.0 * o.1) / d)
    }
    fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }
}

/// Monic characteristic polynomial coefficients `[1, c1, ..., cn]` by the
/// Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I,  c_k = -tr(A M_k) / k
        let mut next = a * &m;
        for i in 0..n {
            next[(i, i)] += coeffs[k - 1];
        }
        m = next;
        let c = -(a * &m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

fn horner(coeffs: &[f64], z: C) -> (C, C) {
    // value and derivative
    let mut p = C(coeffs[0], 0.0);
    let mut dp = C(0.0, 0.0);
    for c in &coeffs[1..] {
        dp = dp.mul(z).add(p);
        p = p.mul(z).add(C(*c, 0.0));
    }
    (p, dp)
}

/// All roots of a monic polynomial: Durand-Kerner iteration followed by
/// Newton polishing.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<C> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C(bound * t.cos(), bound * t.sin())
        })
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, _) = horner(coeffs, z[i]);
            let mut denom = C(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom = denom.mul(z[i].sub(z[j]));
                }
            }
            if denom.abs() == 0.0 {
                continue;
            }
            let step = p.div(denom);
            z[i] = z[i].sub(step);
            moved = moved.max(step.abs());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..30 {
            let (p, dp) = horner(coeffs, *root);
            if dp.abs() == 0.0 {
                break;
            }
            let next = root.sub(p.div(dp));
            if horner(coeffs, next).0.abs() >= p.abs() {
                break;
            }
            *root = next;
        }
    }
    z.into_iter().map(|c| (c.0, c.1)).collect()
}

/// Spectral radius from the roots of the characteristic polynomial.
pub fn oracle_spectral_radius(a: &DMatrix<f64>) -> f64 {
    polynomial_roots(&characteristic_polynomial(a))
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(0.0, f64::max)
}

/// A random nonnegative matrix with some zero entries.
pub fn random_nonnegative<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let zero_prob = rng.gen_range(0.0..0.6);
    DMatrix::from_fn(n, n, |_, _| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen_range(0.0..2.0) })
}

#[cfg(test)]
mod tests {
    #[test]
    fn oracle_on_known_spectra() {
        let m = super::DMatrix::from_row_slice(2, 2, &[0.95, 0.1, 0.1, 0.95]);
        assert!((super::oracle_spectral_radius(&m) - 1.05).abs() < 1e-13);
        let rot = super::DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.5, 0.0]);
        assert!((super::oracle_spectral_radius(&rot) - 1.0).abs() < 1e-13);
    }
}
