use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tidesign::exec::{dot, norm};
use tidesign::gap::{self, SpectrumOptions, Variant};
use tidesign::linalg;
use tidesign::moments::{self, Encoding};

fn residual(op: &gap::MatrixFreeOperator, v: &[f64]) -> f64 {
    let mut y = vec![0.0; v.len()];
    op.apply(v, &mut y);
    norm(&y)
}

#[test]
fn operators_are_symmetric() {
    for v in Variant::ALL {
        let op = gap::build_operator(4, v).unwrap();
        assert!(op.symmetry_defect(20, 1) <= 1e-10);
    }
}

#[test]
fn analytic_ground_states_are_annihilated() {
    for n in 2..=4 {
        for v in [Variant::Full, Variant::LeftOpen, Variant::Bulk] {
            let op = gap::build_operator(n, v).unwrap();
            for g in gap::ground_basis(n, v) {
                assert!(residual(&op, &g) <= 1e-10, "n={n} {v:?}");
            }
        }
    }
    let bulk = gap::build_operator(3, Variant::Bulk).unwrap();
    let phi = moments::product_state(&moments::psi_phi_full(), 3);
    assert!(residual(&bulk, &phi) <= 1e-10);
    let full = gap::build_operator(3, Variant::Full).unwrap();
    assert!(residual(&full, &phi) > 1e-3);
}

#[test]
fn ground_basis_entries() {
    let p0 = moments::psi0_full();
    for (i, &x) in p0.iter().enumerate() {
        let want = if [0b0000, 0b0101, 0b1010, 0b1111].contains(&i) { 0.5 } else { 0.0 };
        assert_eq!(x, want);
    }
    let pf = moments::psi_phi_full();
    for (i, &x) in pf.iter().enumerate() {
        let want = match i {
            0b0101 | 0b1010 => 0.5,
            0b0110 | 0b1001 => -0.5,
            _ => 0.0,
        };
        assert_eq!(x, want);
    }
    for n in 1..=4 {
        let b = gap::ground_basis(n, Variant::Full);
        assert!((dot(&b[0], &b[1]) - 0.5f64.powi(n as i32)).abs() < 1e-15);
    }
}

#[test]
fn bad_sizes_rejected() {
    assert!(gap::build_operator(1, Variant::Bulk).is_err());
    assert!(gap::build_operator(8, Variant::Full).is_err());
    assert!(gap::build_operator_in(Encoding::Sector, 11, Variant::Full).is_err());
    let op = gap::build_operator_in(Encoding::Sector, 3, Variant::Full).unwrap();
    assert!(gap::lowest_spectrum(&op, 9, &SpectrumOptions::default()).is_err());
}

#[test]
fn frustration_free_and_degenerate() {
    for n in 2..=6 {
        for v in Variant::ALL {
            let r = gap::compute_gap(Encoding::Sector, n, v, 4).unwrap();
            assert!(r.eigenvalues[0].abs() < 1e-8);
            assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(r.residuals.iter().all(|&x| x <= 1e-7));
            let want = match (v, n) {
                (Variant::Full | Variant::LeftOpen, _) => 2,
                // at n = 2 the bulk chain has no ZXZ term and one more zero mode
                (_, 2) => 4,
                _ => 3,
            };
            assert_eq!(r.degeneracy, want, "n={n} {v:?}");
            assert!(r.gap > 0.05);
        }
    }
}

#[test]
fn gap_values_regression() {
    let full = [(2, 0.5), (3, 0.241091), (4, 0.202019), (5, 0.175115), (6, 0.157450)];
    for (n, want) in full {
        let r = gap::compute_gap(Encoding::Sector, n, Variant::Full, 4).unwrap();
        assert!((r.gap - want).abs() < 1e-5, "n={n}: {}", r.gap);
    }
    let bulk = [(3, 0.161247), (4, 0.100152), (5, 0.131165), (6, 0.112171)];
    for (n, want) in bulk {
        let r = gap::compute_gap(Encoding::Sector, n, Variant::Bulk, 4).unwrap();
        assert!((r.gap - want).abs() < 1e-5, "n={n}: {}", r.gap);
    }
    let conj = [(3, 0.076120), (4, 0.100152), (5, 0.108638), (6, 0.112171)];
    for (n, want) in conj {
        let r = gap::compute_gap(Encoding::Sector, n, Variant::BulkConjugated, 4).unwrap();
        assert!((r.gap - want).abs() < 1e-5, "n={n}: {}", r.gap);
    }
}

#[test]
fn full_gap_decreases() {
    let g: Vec<f64> = (3..=7).map(|n| gap::compute_gap(Encoding::Sector, n, Variant::Full, 4).unwrap().gap).collect();
    assert!(g.windows(2).all(|w| w[1] < w[0]), "{g:?}");
}

#[test]
fn full_and_sector_encodings_agree() {
    for n in [3usize, 4] {
        for v in Variant::ALL {
            let a = gap::compute_gap(Encoding::Full, n, v, 4).unwrap();
            let b = gap::compute_gap(Encoding::Sector, n, v, 4).unwrap();
            assert!((a.gap - b.gap).abs() < 1e-7, "n={n} {v:?}: {} vs {}", a.gap, b.gap);
        }
    }
}

#[test]
fn rayleigh_quotients_bound_the_gap() {
    let n = 4;
    let op = gap::build_operator_in(Encoding::Sector, n, Variant::Full).unwrap();
    let r = gap::lowest_spectrum(&op, 4, &SpectrumOptions::default()).unwrap();
    let mut basis = gap::ground_basis_in(Encoding::Sector, n, Variant::Full);
    linalg::orthonormalize(&mut basis);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut y = vec![0.0; op.dim()];
    for _ in 0..20 {
        let mut w: Vec<f64> = (0..op.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
        for b in &basis {
            let c = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(a, x)| *a -= c * x);
        }
        op.apply(&w, &mut y);
        assert!(dot(&w, &y) / dot(&w, &w) >= r.gap - 1e-8);
    }
}

#[test]
fn conjugation_even_chains() {
    for n in [2usize, 4] {
        let c = gap::cz_conjugation_check(n, 5, 3).unwrap();
        assert!(c.max_deviation <= 1e-10, "n={n}: {}", c.max_deviation);
        assert!(c.unitarity_deviation <= 1e-12);
    }
    for n in [6usize, 8] {
        let c = gap::cz_conjugation_check_in(Encoding::Sector, n, 3, 3).unwrap();
        assert!(c.max_deviation <= 1e-10);
    }
}

#[test]
fn conjugation_fails_on_odd_chains() {
    // the two bulk operators have different spectra for odd n, so no V_n exists
    let c = gap::cz_conjugation_check(3, 5, 3).unwrap();
    assert!(c.max_deviation > 0.1);
    assert!(c.unitarity_deviation <= 1e-12);
    let a = gap::compute_gap(Encoding::Sector, 3, Variant::Bulk, 4).unwrap();
    let b = gap::compute_gap(Encoding::Sector, 3, Variant::BulkConjugated, 4).unwrap();
    assert!((a.gap - b.gap).abs() > 0.05);
}

#[test]
fn csv_layout() {
    let reports: Vec<_> = (3..=4)
        .flat_map(|n| [Variant::Bulk, Variant::Full].map(|v| gap::compute_gap(Encoding::Sector, n, v, 4).unwrap()))
        .collect();
    let csv = gap::gap_table_csv(&reports, Variant::Bulk);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,gap_bulk,gap_full");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3,"));

    let left = gap::compute_gap(Encoding::Sector, 3, Variant::LeftOpen, 4).unwrap();
    let csv = gap::gap_table_csv(&[left], Variant::Bulk);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,gap_bulk,gap_full,gap_leftopen");
    assert!(lines[1].starts_with("3,,,0.13"));
}

#[test]
fn nachtergaele_evaluation() {
    let table: BTreeMap<usize, f64> = [(7, 0.111)].into_iter().collect();
    let r = gap::nachtergaele_bound(&table, 6, None).unwrap();
    assert!((r.eps_l - 8.5 / 64.0).abs() < 1e-15);
    assert!(r.eps_l < r.condition_threshold && r.half_condition_holds);
    assert_eq!(r.d, 8);
    let want = (0.111 / 8.0) * (1.0 - 8.5 / 64.0 * 7f64.sqrt()).powi(2);
    assert!((r.bound - want).abs() < 1e-15);
    assert!((r.bound_quoted - 0.111 / 32.0).abs() < 1e-15);
    let small: BTreeMap<usize, f64> = [(3, 0.1)].into_iter().collect();
    assert!(gap::nachtergaele_bound(&small, 2, None).is_err());
    assert!(gap::nachtergaele_bound(&table, 5, None).is_err());
}

#[test]
fn overlap_epsilon_within_bound() {
    for q in 1..=4 {
        for l in 1..=q {
            let e = gap::overlap_epsilon(q, l).unwrap();
            assert!(e <= 8.5 / 2f64.powi(l as i32) + 1e-12, "q={q} l={l}: {e}");
            if l == q {
                assert!(e <= 1.0 + 1e-12);
            }
        }
    }
    assert!(gap::overlap_epsilon(5, 2).is_err());
}

#[test]
fn overlap_epsilon_regression() {
    let cases = [(2, 1, (0.7f64).sqrt()), (2, 2, 1.0 / 15f64.sqrt()), (3, 2, 0.295468420143)];
    for (q, l, want) in cases {
        let e = gap::overlap_epsilon(q, l).unwrap();
        assert!((e - want).abs() < 1e-9, "q={q} l={l}: {e}");
    }
}
