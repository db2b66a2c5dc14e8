use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tidesign::arch;
use tidesign::avgcase::{self, Mode, RecoveryConfig, ThetaNodes, TruncatedGateSchedule};
use tidesign::moments;
use tidesign::C64;

#[test]
fn gate_at_theta_zero_is_the_haar_draw() {
    for r in [-1.2, 0.0, 0.4, 1.5] {
        let d = avgcase::truncated_diag(r, 0.0, 5);
        assert_eq!(d[0], C64::from_polar(1.0, r));
        assert_eq!(d[1], C64::from_polar(1.0, -r));
    }
}

#[test]
fn long_series_matches_exact_gate() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let r = avgcase::reduce_generator(rng.random_range(0.0..2.0 * PI));
        let t = avgcase::truncated_diag(r, 1.0, 40);
        let e = avgcase::exact_diag(r, 1.0);
        assert!((t[0] - e[0]).norm() < 1e-15 && (t[1] - e[1]).norm() < 1e-15);
    }
}

#[test]
fn unitarity_defect_bounds() {
    // the Taylor remainder bound holds on the whole range |r| ≤ 2π
    for i in 0..=200 {
        let r = -2.0 * PI + 4.0 * PI * i as f64 / 200.0;
        for k in 0..=10 {
            let y = (0.1 * r).abs();
            let rem = y.powi(k as i32 + 1) / (1..=k + 1).map(|j| j as f64).product::<f64>() * y.exp();
            let d = avgcase::unitarity_defect(&avgcase::truncated_diag(r, 0.1, k));
            assert!(d <= 2.0 * rem + rem * rem + 1e-15, "r={r} K={k}");
        }
    }
    // on the reduced branch the K = 6 gate is unitary to 1e-6
    for i in 0..=100 {
        let r = -FRAC_PI_2 + PI * i as f64 / 100.0;
        assert!(avgcase::unitarity_defect(&avgcase::truncated_diag(r, 0.1, 6)) <= 1e-6);
    }
}

#[test]
fn oracle_at_theta_one_recovers_the_instance() {
    for seed in 1..=5 {
        let s = TruncatedGateSchedule::random(2, 2, 40, seed).unwrap();
        let a = avgcase::p0_oracle(&s, 1.0).unwrap();
        let b = avgcase::p0_direct(&s).unwrap();
        assert!((a - b).abs() <= 1e-10);
        assert!((avgcase::p0_exact(&s, 1.0).unwrap() - b).abs() <= 1e-13);
    }
}

#[test]
fn oracle_at_theta_zero_is_fully_random() {
    let s = TruncatedGateSchedule::random(3, 2, 4, 8).unwrap();
    let c = arch::EffectiveCircuit::new(
        3,
        s.base.iter().zip(&s.haar).map(|(a, r)| a.iter().zip(r).map(|(x, y)| x + y).collect()).collect(),
    )
    .unwrap();
    let st = tidesign::sim::run_effective(&c, &tidesign::sim::StateVector::plus(3)).unwrap();
    assert!((avgcase::p0_oracle(&s, 0.0).unwrap() - st.amps[0].norm_sqr()).abs() < 1e-14);
}

#[test]
fn oracle_is_a_polynomial_of_the_nominal_degree() {
    for seed in 1..=3 {
        let s = TruncatedGateSchedule::random(2, 2, 3, seed).unwrap();
        let d = s.nominal_degree();
        assert_eq!(d, 24);
        let nodes = avgcase::chebyshev_nodes(d + 1, 1.0);
        let vals: Vec<f64> = nodes.iter().map(|&t| avgcase::p0_oracle(&s, t).unwrap()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let t: f64 = rng.random_range(0.0..1.0);
            let interp = avgcase::barycentric(&nodes, &vals, t);
            assert!((interp - avgcase::p0_oracle(&s, t).unwrap()).abs() <= 1e-8);
        }
    }
}

#[test]
fn recovery_demonstration() {
    let s = TruncatedGateSchedule::random(2, 2, 4, 1).unwrap();
    for c in [0.0, 0.2] {
        let cfg = RecoveryConfig { corruption: c, ..RecoveryConfig::default() };
        let r = avgcase::recover_and_extrapolate(&s, &cfg).unwrap();
        assert!(r.abs_error <= 1e-6, "c={c}: {}", r.abs_error);
        assert_eq!(r.detected_errors, r.corrupted_indices);
        assert_eq!(r.corrupted_indices.len(), (c * 40.0) as usize);
        assert_eq!(r.status, "ok");
        assert!(r.field_track.as_ref().unwrap().exact);
    }
}

#[test]
fn recovery_across_seeds() {
    for seed in 2..=12 {
        let s = TruncatedGateSchedule::random(2, 2, 4, seed).unwrap();
        let cfg = RecoveryConfig { seed, ..RecoveryConfig::default() };
        let r = avgcase::recover_and_extrapolate(&s, &cfg).unwrap();
        assert!(r.abs_error <= 1e-6, "seed={seed}: {}", r.abs_error);
    }
}

#[test]
fn greedy_decoder_is_available() {
    let s = TruncatedGateSchedule::random(2, 1, 2, 3).unwrap();
    let cfg = RecoveryConfig { corruption: 0.0, decoder: avgcase::FloatDecoder::Greedy, ..RecoveryConfig::default() };
    let r = avgcase::recover_and_extrapolate(&s, &cfg).unwrap();
    assert!(r.abs_error <= 1e-8);
}

#[test]
fn faithful_mode_error_grows_with_degree() {
    let errs: Vec<f64> = [1usize, 4]
        .iter()
        .map(|&k| {
            let s = TruncatedGateSchedule::random(2, 2, k, 1).unwrap();
            let cfg = RecoveryConfig { corruption: 0.0, mode: Mode::Faithful { theta_max: 0.05 }, ..RecoveryConfig::default() };
            avgcase::recover_and_extrapolate(&s, &cfg).unwrap().extrapolation_error
        })
        .collect();
    assert!(errs[1] > errs[0], "{errs:?}");
}

#[test]
fn recovery_rejects_bad_configs() {
    let s = TruncatedGateSchedule::random(2, 2, 4, 1).unwrap();
    let bad = RecoveryConfig { corruption: 1.2, ..RecoveryConfig::default() };
    assert!(avgcase::recover_and_extrapolate(&s, &bad).is_err());
    let bad = RecoveryConfig { mode: Mode::Faithful { theta_max: 0.0 }, ..RecoveryConfig::default() };
    assert!(avgcase::recover_and_extrapolate(&s, &bad).is_err());
}

#[test]
fn equispaced_nodes_cover_the_interval() {
    let v = avgcase::theta_nodes(ThetaNodes::Equispaced, 5, 0.5);
    assert_eq!(v, vec![0.0, 0.125, 0.25, 0.375, 0.5]);
}

#[test]
fn truncation_error_decays_factorially() {
    let s = TruncatedGateSchedule::random(2, 2, 0, 1).unwrap();
    assert_eq!(avgcase::truncation_error_sweep(&s, &[0], 0.0).unwrap()[0].error, 0.0);
    let ks: Vec<usize> = (0..=20).collect();
    let rows = avgcase::truncation_error_sweep(&s, &ks, 1.0).unwrap();
    let y = s.max_generator();
    let gates = (s.n * s.depth()) as f64;
    for r in &rows {
        let k = r.k_trunc;
        let rem = y.powi(k as i32 + 1) / (1..=k + 1).map(|j| j as f64).product::<f64>() * y.exp();
        // |p − p'| ≤ 2‖U − U'‖ and the gate errors add up
        let bound = 2.0 * gates * rem * (1.0 + rem).powf(gates);
        assert!(r.error <= bound + 1e-15, "K={k}: {} > {bound}", r.error);
    }
    // averaged ratio over a window follows the remainder ratio
    let (k1, k2) = (8usize, 14usize);
    let ratio = (rows[k2].error / rows[k1].error).powf(1.0 / (k2 - k1) as f64);
    assert!(ratio <= y / (k1 + 2) as f64 * 1.5, "{ratio}");
}

#[test]
fn hiding_commutes_with_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let s = TruncatedGateSchedule::random(3, 2, 3, rng.random()).unwrap();
        let y = rng.random_range(0..8usize);
        let h = avgcase::hide_schedule(&s, &arch::bits_of(y, 3)).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let a = avgcase::output_probability(&s, t, y).unwrap();
            let b = avgcase::p0_oracle(&h, t).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn theta_zero_matches_random_architecture_collision() {
    let (n, depth, samples) = (3, 3, 4000);
    let mut acc = 0.0;
    let mut acc2 = 0.0;
    for seed in 0..samples {
        let s = TruncatedGateSchedule::random(n, depth, 2, seed as u64).unwrap();
        let c: f64 = (0..1 << n).map(|x| avgcase::output_probability(&s, 0.0, x).unwrap().powi(2)).sum();
        acc += c;
        acc2 += c * c;
    }
    let mean = acc / samples as f64;
    let se = ((acc2 / samples as f64 - mean * mean) / samples as f64).sqrt();
    let exact = moments::collision_expectation(n, depth).unwrap();
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} ± {se}");
}

#[test]
fn sweep_csv_layout() {
    let s = TruncatedGateSchedule::random(2, 1, 1, 1).unwrap();
    let csv = avgcase::sweep_csv(&avgcase::truncation_error_sweep(&s, &[1, 2], 1.0).unwrap());
    assert!(csv.starts_with("K,error\n1,"));
}
