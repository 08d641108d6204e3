use gc_dhmc::diagnostics::{acf, poisson_pmf, tv_distance};
use gc_dhmc::dynamics::{move_indicator, Dhmc, IntegratorConfig};
use gc_dhmc::jumps::{barrier_delete, barrier_insert};
use gc_dhmc::potentials::{Cosine, FreeGas, LennardJones, PotentialModel};
use gc_dhmc::rbm::{rbm_grad, BatchPartition, RbmScaling};
use gc_dhmc::system::{extended_hamiltonian, laplace_kinetic};
use gc_dhmc::{PhaseState, RngStream, SystemParams};
use proptest::prelude::*;

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn prob_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 1..12).prop_map(normalize)
}

/// Particles of a dilute 3-D configuration, at least `0.9` apart.
fn spread_positions(count: usize, l: f64, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed);
    let mut q: Vec<f64> = Vec::new();
    while q.len() < 3 * count {
        let x = [rng.uniform() * l, rng.uniform() * l, rng.uniform() * l];
        let ok = q.chunks(3).all(|p| {
            let r2: f64 = (0..3)
                .map(|k| gc_dhmc::geometry::min_image(p[k] - x[k], l).powi(2))
                .sum();
            r2 > 0.81
        });
        if ok {
            q.extend_from_slice(&x);
        }
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_is_a_metric(a in prob_vec(), b in prob_vec(), c in prob_vec()) {
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert!((ab - tv_distance(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn acf_is_bounded(series in prop::collection::vec(-5.0f64..5.0, 8..200), lag in 1usize..7) {
        prop_assume!(series.iter().any(|&x| (x - series[0]).abs() > 1e-9));
        let r = acf(&series, lag).unwrap();
        prop_assert!((r[0] - 1.0).abs() < 1e-12);
        prop_assert!(r.iter().all(|x| (-1.0 - 1e-12..=1.0 + 1e-12).contains(x)));
    }

    #[test]
    fn poisson_recurrence(lambda in 0.1f64..40.0, k in 0usize..120) {
        let a = poisson_pmf(lambda, k);
        let b = poisson_pmf(lambda, k + 1);
        prop_assume!(a > 1e-300);
        prop_assert!((b / (a * lambda / (k + 1) as f64) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_jump_trajectory_is_reversible(seed in 0u64..1_000, count in 1usize..8, steps in 1usize..30) {
        let params = SystemParams::periodic(1.0, -0.5, 10.0, 1).unwrap();
        let model = Cosine::new(10.0);
        let cfg = IntegratorConfig { jumps: false, ..IntegratorConfig::default() };
        let mut rng = RngStream::new(seed);
        let q: Vec<f64> = (0..count).map(|_| rng.uniform() * 10.0).collect();
        let mut s = PhaseState::from_positions(1, q);
        s.momenta = (0..count).map(|_| rng.gaussian()).collect();
        let start = s.clone();
        let mut dhmc = Dhmc::new(&model, &params, &cfg).unwrap();
        for _ in 0..steps {
            dhmc.step(&mut s, 0.07, &mut rng).unwrap();
        }
        s.momenta.iter_mut().for_each(|p| *p = -*p);
        for _ in 0..steps {
            dhmc.step(&mut s, 0.07, &mut rng).unwrap();
        }
        for (a, b) in s.positions.iter().zip(&start.positions) {
            let d = gc_dhmc::geometry::min_image(a - b, 10.0);
            prop_assert!(d.abs() < 1e-10, "position drift {d}");
        }
        for (a, b) in s.momenta.iter().zip(&start.momenta) {
            prop_assert!((a + b).abs() < 1e-10);
        }
    }

    #[test]
    fn insert_then_delete_cancels(seed in 0u64..1_000, count in 0usize..12) {
        let params = SystemParams::periodic(2.0, -1.0, 12.6, 3).unwrap();
        let lj = LennardJones::new(12.6, 2.5).unwrap();
        let q = spread_positions(count + 1, 12.6, seed);
        let base = PhaseState::from_positions(3, q[..3 * count].to_vec());
        let grown = PhaseState::from_positions(3, q.clone());
        let up = barrier_insert(&base, &q[3 * count..], &lj, &params).unwrap();
        let down = barrier_delete(&grown, count, &lj, &params).unwrap();
        prop_assert!((up + down).abs() < 1e-12 * (1.0 + up.abs()));
    }

    #[test]
    fn deletion_is_permutation_symmetric(seed in 0u64..1_000, count in 2usize..10, pick in 0usize..10) {
        let i = pick % count;
        let params = SystemParams::periodic(2.0, 0.3, 12.6, 3).unwrap();
        let lj = LennardJones::new(12.6, 2.5).unwrap();
        let q = spread_positions(count, 12.6, seed);
        let s = PhaseState::from_positions(3, q.clone());
        let mut swapped = q.clone();
        for k in 0..3 {
            swapped.swap(3 * i + k, 3 * (count - 1) + k);
        }
        let t = PhaseState::from_positions(3, swapped);
        let a = barrier_delete(&s, i, &lj, &params).unwrap();
        let b = barrier_delete(&t, count - 1, &lj, &params).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn incremental_energy_matches_full(seed in 0u64..1_000, count in 1usize..25) {
        let lj = LennardJones::new(12.6, 2.5).unwrap();
        let q = spread_positions(count + 1, 12.6, seed);
        let before = lj.energy(&q[..3 * count]).unwrap();
        let after = lj.energy(&q).unwrap();
        let inc = lj.insertion_delta(&q[..3 * count], &q[3 * count..]).unwrap();
        prop_assert!((after - before - inc).abs() < 1e-10);
        let rem = lj.removal_delta(&q, count).unwrap();
        prop_assert!((before - after - rem).abs() < 1e-10);
    }

    #[test]
    fn indicator_stays_consistent(seed in 0u64..5_000, count in 0usize..6, frac in 0.0f64..1.0,
                                  p_n in -4.0f64..4.0, travel in 0.0f64..1.5, mu in -3.0f64..3.0) {
        let params = SystemParams::periodic(1.0, mu, 10.0, 1).unwrap();
        let model = Cosine::new(10.0);
        let mut rng = RngStream::new(seed);
        let q: Vec<f64> = (0..count).map(|_| rng.uniform() * 10.0).collect();
        let mut s = PhaseState::from_positions(1, q);
        s.n = count as f64 + frac;
        s.p_n = p_n;
        let mut events = Vec::new();
        move_indicator(&mut s, &model, &params, travel, &mut rng, &mut events).unwrap();
        prop_assert!(s.n >= 0.0);
        prop_assert_eq!(s.n.floor() as usize, s.count());
        prop_assert_eq!(s.momenta.len(), s.positions.len());
        for e in &events {
            prop_assert_eq!(e.accepted, e.kinetic_before >= e.barrier);
        }
    }

    #[test]
    fn hamiltonian_changes_only_through_barrier(seed in 0u64..1_000, p_n in 0.5f64..6.0) {
        // an accepted free-gas insertion moves the barrier into K_n, so
        // H + log(pi)/beta is conserved across the jump
        let params = SystemParams::periodic(1.0, 0.5, 10.0, 1).unwrap();
        let mut rng = RngStream::new(seed);
        let mut s = PhaseState::from_positions(1, vec![2.0, 7.0]);
        s.n = 2.9;
        s.p_n = p_n;
        let h0 = extended_hamiltonian(&s, &FreeGas, &params).unwrap();
        let mut events = Vec::new();
        move_indicator(&mut s, &FreeGas, &params, 0.2, &mut rng, &mut events).unwrap();
        prop_assert_eq!(events.len(), 1);
        let e = &events[0];
        prop_assert!(e.accepted);
        let h1 = extended_hamiltonian(&s, &FreeGas, &params).unwrap();
        let log_g = -(10.0f64).ln();
        let log_pi = log_g - 0.5 * s.momenta[2] * s.momenta[2] - 0.5 * (2.0 * std::f64::consts::PI).ln();
        prop_assert!((h1 - h0 + log_pi).abs() < 1e-10);
        prop_assert!((laplace_kinetic(s.p_n, 1.0) - (e.kinetic_before - e.barrier)).abs() < 1e-12);
    }

    #[test]
    fn rbm_whole_batch_is_exact(seed in 0u64..1_000, count in 2usize..9) {
        let model = Cosine::new(10.0);
        let mut rng = RngStream::new(seed);
        let q: Vec<f64> = (0..count).map(|_| rng.uniform() * 10.0).collect();
        let part = BatchPartition::from_order(rng.permutation(count), count);
        let mut est = vec![0.0; count];
        rbm_grad(&q, 1, &model, &part, RbmScaling::Corrected, &mut est).unwrap();
        let mut full = vec![0.0; count];
        model.gradient(&q, &mut full).unwrap();
        for (a, b) in est.iter().zip(&full) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
