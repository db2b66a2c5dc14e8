use tidesign::anticonc::{self, default_alphas};
use tidesign::moments;

#[test]
fn bound_formula() {
    assert_eq!(anticonc::paley_zygmund_bound(0.0, 0.0), 0.5);
    assert_eq!(anticonc::paley_zygmund_bound(0.5, 0.0), 0.125);
    assert!(anticonc::paley_zygmund_bound(0.5, 0.1) < 0.125);
}

#[test]
fn porter_thomas_values() {
    let r = anticonc::porter_thomas_reference(6, &[0.0, 1.0]).unwrap();
    assert_eq!(r.fractions[0], 1.0);
    assert!((r.fractions[1] - 0.36787944).abs() < 1e-8);
    assert!((r.collision - 2.0 / 65.0).abs() < 1e-15);
    assert!((anticonc::porter_thomas_reference(1, &[]).unwrap().collision - 2.0 / 3.0).abs() < 1e-15);
    assert!(anticonc::porter_thomas_reference(0, &[]).is_err());
}

#[test]
fn fractions_are_monotone_and_bounded() {
    let r = anticonc::estimate(5, 5, 1000, &default_alphas(), 0.0, 3).unwrap();
    assert!(!r.insufficient_samples);
    for w in r.rows.windows(2) {
        assert!(w[1].fraction <= w[0].fraction && w[1].fraction_avg <= w[0].fraction_avg);
    }
    for row in &r.rows {
        assert!((0.0..=1.0).contains(&row.fraction));
        let se = (row.fraction * (1.0 - row.fraction) / 1000.0).sqrt();
        assert!((row.stderr - se).abs() < 1e-15);
    }
    assert!(r.max_normalization_error < 1e-10);
    assert!(r.rows[0].fraction >= 0.5);
}

#[test]
fn bound_holds_at_design_depth() {
    let n = 8;
    let depth = 4 * n;
    let eps = moments::moment_epsilon(n, depth).unwrap();
    let r = anticonc::estimate(n, depth, 1000, &default_alphas(), eps, 11).unwrap();
    assert!(!r.any_violation());
    let half = r.rows.iter().find(|x| x.alpha == 0.5).unwrap();
    assert!(half.fraction >= 0.125 - 3.0 * half.stderr);
}

#[test]
fn deep_collision_is_haar() {
    let r = anticonc::estimate(6, 30, 2000, &[0.5], 0.0, 5).unwrap();
    assert!((r.collision - 2.0 / 65.0).abs() <= 3.0 * r.collision_stderr, "{} ± {}", r.collision, r.collision_stderr);
}

#[test]
fn empty_circuit_row() {
    let r = anticonc::estimate(6, 0, 1000, &[0.0, 1.0], 0.0, 1).unwrap();
    assert!((r.collision_normalized - 1.0).abs() < 1e-12);
    assert_eq!(r.collision_stderr, 0.0);
}

#[test]
fn collision_approaches_haar_with_depth() {
    let reports = anticonc::depth_sweep(6, &[1, 3, 10], 1000, &[0.5], 0.0, 2).unwrap();
    let haar = 2.0 / 65.0;
    let dist: Vec<f64> = reports.iter().map(|r| (r.collision - haar).abs()).collect();
    for (w, r) in dist.windows(2).zip(&reports[1..]) {
        assert!(w[1] <= w[0] + 3.0 * r.collision_stderr);
    }
    // the exact expectation agrees with the estimate
    for r in &reports {
        let exact = moments::collision_expectation(6, r.depth).unwrap();
        assert!((r.collision - exact).abs() <= 4.0 * r.collision_stderr);
    }
}

#[test]
fn square_lattice_collision_near_haar() {
    let r = anticonc::estimate(6, 6, 2000, &[0.5], 0.0, 9).unwrap();
    assert!((r.collision / (2.0 / 65.0) - 1.0).abs() <= 0.1);
}

#[test]
fn reproducible_from_seed() {
    tidesign::exec::set_serial(true);
    let a = anticonc::estimate(4, 3, 200, &default_alphas(), 0.0, 7).unwrap();
    tidesign::exec::set_serial(false);
    let b = anticonc::estimate(4, 3, 200, &default_alphas(), 0.0, 7).unwrap();
    assert_eq!(a, b);
    assert!(a.insufficient_samples);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn csv_columns() {
    let r = anticonc::estimate(3, 2, 10, &[0.0, 0.5], 0.0, 1).unwrap();
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,D,alpha,fraction,stderr,bound,pt_reference"));
    assert!(lines.next().unwrap().starts_with("3,2,0,"));
}

#[test]
fn invalid_requests() {
    assert!(anticonc::estimate(15, 1, 1000, &[0.5], 0.0, 1).is_err());
    assert!(anticonc::estimate(3, 1, 0, &[0.5], 0.0, 1).is_err());
    assert!(anticonc::estimate(3, 1, 10, &[1.5], 0.0, 1).is_err());
}
