mod common;

use nalgebra::{DMatrix, DVector};
use periodic_sis::control::{controlled_radius, synthesize, GammaSpec};
use periodic_sis::experiments::{sweep, SweepConfig, SweepParam};
use periodic_sis::model::{simulate_from, step_matrix_form, Simulator};
use periodic_sis::spectral::{jsr_bounds, lift_radius, monodromy_radius, spectral_radius, subinvariant_vectors, DEFAULT_TOL};
use periodic_sis::stability::{lifted_simulate, lyapunov_certificate, rate_bound, stacked_prefix};
use periodic_sis::{
    build_system_matrices, classify, simulate, step, Classification, ClassifyOptions, PeriodicSchedule, StateVector,
};
use proptest::prelude::*;
use rand::Rng;

fn schedule(seed: u64) -> PeriodicSchedule {
    common::random_schedule(&mut common::rng(seed), 12, 4)
}

fn start(seed: u64, n: usize) -> StateVector {
    StateVector::new(common::random_state(&mut common::rng(seed ^ 0x5eed), n)).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn states_stay_in_unit_cube(seed in any::<u64>()) {
        let s = schedule(seed);
        let mats = build_system_matrices(&s);
        let mut sim = Simulator::new(&mats, &start(seed, s.n()), 0).unwrap();
        for _ in 0..500 {
            for v in sim.advance() {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(v));
            }
        }
    }

    #[test]
    fn scalar_and_matrix_forms_agree(seed in any::<u64>(), t in 0usize..8) {
        let s = schedule(seed);
        let mats = build_system_matrices(&s);
        let x = start(seed, s.n());
        let phase = mats.phase(t);
        let a = step(&x, phase, s.h()).unwrap();
        let b = step_matrix_form(x.as_slice(), phase, s.h());
        let pressure = phase.bbar * DVector::from_column_slice(x.as_slice());
        for i in 0..s.n() {
            // ulps of the largest term entering the update
            let scale = x.as_slice()[i].max(s.h() * pressure[i]).max(a.as_slice()[i].abs());
            prop_assert!((a.as_slice()[i] - b[i]).abs() <= 10.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn repeated_period_gives_identical_trajectory(seed in any::<u64>()) {
        let s = schedule(seed);
        let doubled = PeriodicSchedule::new(s.n(), s.h(), [s.phases(), s.phases()].concat(), None).unwrap();
        let x0 = start(seed, s.n());
        let a = simulate(&build_system_matrices(&s), &x0, 60).unwrap();
        let b = simulate(&build_system_matrices(&doubled), &x0, 60).unwrap();
        prop_assert_eq!(a.states, b.states);
    }

    #[test]
    fn start_phase_matches_rotated_schedule(seed in any::<u64>(), k in 0usize..4) {
        let s = schedule(seed);
        let k = k % s.p();
        let mut rotated = s.phases().to_vec();
        rotated.rotate_left(k);
        let r = PeriodicSchedule::new(s.n(), s.h(), rotated, None).unwrap();
        let x0 = start(seed, s.n());
        let a = simulate_from(&build_system_matrices(&s), &x0, k, 40).unwrap();
        let b = simulate(&build_system_matrices(&r), &x0, 40).unwrap();
        prop_assert_eq!(a.states, b.states);
    }

    #[test]
    fn jsr_brackets_lift_radius(seed in any::<u64>()) {
        let s = schedule(seed);
        let mats = build_system_matrices(&s);
        let b = jsr_bounds(&mats.m, 3).unwrap();
        let r = lift_radius(monodromy_radius(&mats.m).unwrap(), s.p());
        prop_assert!(b.lower <= b.upper);
        prop_assert!(r <= b.upper * (1.0 + 1e-9) + 1e-12);
        let single = jsr_bounds(&mats.m[..1], 3).unwrap();
        prop_assert!(single.upper - single.lower < 1e-9 * single.upper.max(1.0));
    }

    #[test]
    fn jsr_is_tight_on_diagonal_sets(diags in prop::collection::vec(prop::collection::vec(0.0f64..2.0, 3), 1..4)) {
        let set: Vec<_> = diags.iter().map(|d| DMatrix::from_diagonal(&DVector::from_vec(d.clone()))).collect();
        let b = jsr_bounds(&set, 2).unwrap();
        prop_assert!(b.upper - b.lower < 1e-9);
    }

    #[test]
    fn larger_gain_never_raises_radius(seed in any::<u64>(), g in 0.0f64..1.0, dg in 0.0f64..1.0) {
        let s = schedule(seed);
        let room = 1.0 / s.h() - s.max_infection_row_sum();
        let phases: Vec<usize> = (0..s.p()).filter(|k| k % 2 == 0).collect();
        let lo = controlled_radius(&s, g * room, &phases, None).unwrap();
        let hi = controlled_radius(&s, (g + dg).min(1.0) * room, &phases, None).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-10));
    }

    #[test]
    fn controlled_rates_are_exact(seed in any::<u64>(), g in 0.0f64..2.0) {
        let s = schedule(seed);
        let phases: Vec<usize> = (0..s.p()).collect();
        let (plan, c) = synthesize(&s, &GammaSpec::Scalar(g), &phases, None).unwrap();
        for (k, ph) in s.phases().iter().enumerate() {
            for (i, sum) in ph.infection_row_sums().into_iter().enumerate() {
                prop_assert_eq!(c.phases()[k].delta[i], sum + g);
                prop_assert_eq!(plan.synthesized_delta[k][i], sum + g);
            }
        }
    }

    #[test]
    fn certificate_decreases_along_linear_steps(seed in any::<u64>()) {
        let s = schedule(seed);
        let mats = build_system_matrices(&s);
        let Ok(cert) = lyapunov_certificate(&mats, 1e-9) else { return Ok(()) };
        prop_assume!(monodromy_radius(&mats.m).unwrap() < 1.0 - 1e-9);
        let mut rng = common::rng(seed);
        for k in 0..s.p() {
            let x = DVector::from_vec(common::random_nonzero_state(&mut rng, s.n()));
            let y = &mats.m[k] * &x;
            prop_assert!(cert.value(k + 1, y.as_slice()) < cert.value(k, x.as_slice()));
        }
    }

    #[test]
    fn rate_envelope_bounds_linear_orbits(seed in any::<u64>()) {
        let s = schedule(seed);
        let mats = build_system_matrices(&s);
        prop_assume!(monodromy_radius(&mats.m).unwrap() < 1.0 - 1e-9);
        let cert = lyapunov_certificate(&mats, 1e-9).unwrap();
        let rb = rate_bound(&cert, &mats).unwrap();
        prop_assert!((0.0..1.0).contains(&rb.rate));
        let mut x = DVector::from_vec(common::random_nonzero_state(&mut common::rng(seed), s.n()));
        let n0 = common::norm2(x.as_slice());
        for k in 1..=100 {
            x = &mats.m[(k - 1) % s.p()] * x;
            let env = rb.envelope(n0, k);
            prop_assert!(common::norm2(x.as_slice()) <= env * (1.0 + 4.0 * (k + 1) as f64 * f64::EPSILON) || env < 1e-290);
        }
    }

    #[test]
    fn lifted_map_tracks_direct_simulation(seed in any::<u64>()) {
        let s = schedule(seed);
        let mats = build_system_matrices(&s);
        let (n, p) = (s.n(), s.p());
        let x0 = start(seed, n);
        let lifted = lifted_simulate(&mats, &stacked_prefix(&mats, &x0).unwrap(), 5).unwrap();
        let direct = simulate(&mats, &x0, 5 * p + p - 1).unwrap();
        for (q, y) in lifted.iter().enumerate() {
            for i in 0..p {
                for (a, b) in y[i * n..(i + 1) * n].iter().zip(&direct.states[q * p + i]) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn classification_follows_radius(seed in any::<u64>()) {
        let s = schedule(seed);
        let mats = build_system_matrices(&s);
        let opts = ClassifyOptions { jsr_depth: 2, ..ClassifyOptions::default() };
        let r = classify(&s, &mats, &opts).unwrap();
        let expected = if r.rho_monodromy < 1.0 - opts.tol_eq {
            Classification::Ges
        } else if !r.assumptions.connectivity_ok() {
            Classification::Inconclusive
        } else if r.rho_monodromy > 1.0 + opts.tol_eq {
            Classification::Unstable
        } else {
            Classification::GasBoundary
        };
        prop_assert_eq!(r.classification, expected);
        prop_assert!(r.rho_lift <= r.jsr_upper * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn subinvariant_vectors_are_strict(seed in any::<u64>(), slack in 0.01f64..1.0) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=8);
        let m = common::random_nonnegative(&mut rng, n);
        let mu = spectral_radius(&m, DEFAULT_TOL).unwrap() + slack;
        let (xi, eta) = subinvariant_vectors(&m, mu).unwrap();
        prop_assert!(xi.min() > 0.0 && eta.min() > 0.0);
        prop_assert!((&m * &xi - &xi * mu).max() < 0.0);
        prop_assert!((m.tr_mul(&eta) - &eta * mu).max() < 0.0);
    }

    #[test]
    fn spectral_radius_matches_oracle(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=6);
        let m = common::random_nonnegative(&mut rng, n);
        let rho = spectral_radius(&m, DEFAULT_TOL).unwrap();
        prop_assert!((rho - common::oracle_spectral_radius(&m)).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn delta_sweep_radius_is_monotone(seed in any::<u64>()) {
        let s = schedule(seed);
        let top = 1.0 / s.h();
        let values: Vec<f64> = (0..=8).map(|i| top * i as f64 / 8.0).collect();
        let cfg = SweepConfig {
            steps: 50,
            classify: ClassifyOptions { jsr_depth: 1, ..ClassifyOptions::default() },
            ..SweepConfig::default()
        };
        let report = sweep(&s, SweepParam::DeltaScalar, &values, &cfg);
        let rhos: Vec<f64> = report.rows.iter().map(|r| r.rho.unwrap()).collect();
        for w in rhos.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-10) + 1e-14);
        }
        let classes: Vec<_> = report.rows.iter().map(|r| r.classification.unwrap()).collect();
        // once GES, larger healing stays GES
        if let Some(first) = classes.iter().position(|c| *c == Classification::Ges) {
            prop_assert!(classes[first..].iter().all(|c| *c == Classification::Ges));
        }
    }
}
