use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tidesign::exec::dot;
use tidesign::moments::{self, Encoding, HaarProjector, LayerForm, TransferOperator};
use tidesign::C64;

type CMat = Vec<Vec<C64>>;

fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![C64::new(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn pauli(c: char) -> CMat {
    let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    match c {
        'I' => vec![vec![o, z], vec![z, o]],
        'X' => vec![vec![z, o], vec![o, z]],
        'Z' => vec![vec![o, z], vec![z, -o]],
        _ => unreachable!(),
    }
}

/// `exp(iφP)` for a Pauli string.
fn rotation(s: &str, phi: f64) -> CMat {
    let p = s.chars().map(pauli).reduce(|a, b| kron(&a, &b)).unwrap();
    let d = p.len();
    (0..d)
        .map(|i| (0..d).map(|j| p[i][j] * C64::new(0.0, phi.sin()) + if i == j { C64::new(phi.cos(), 0.0) } else { C64::new(0.0, 0.0) }).collect())
        .collect()
}

fn conj(a: &CMat) -> CMat {
    a.iter().map(|r| r.iter().map(|c| c.conj()).collect()).collect()
}

/// Applies `U` to copy `c` of a copy-major vector with `k` qubits per copy.
fn apply_copy(u: &CMat, c: usize, k: usize, v: &[C64]) -> Vec<C64> {
    let d = 1 << k;
    let shift = k * (3 - c);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let a = (i >> shift) & (d - 1);
        let root = i & !((d - 1) << shift);
        for b in 0..d {
            *o += u[a][b] * v[root | (b << shift)];
        }
    }
    out
}

/// `(1/16)Σ_j (e^{iφ_j P})^{⊗2,2} v` with `φ_j = 2πj/16`; exact for degree-4 trig polynomials.
fn averaged(s: &str, v: &[C64]) -> Vec<C64> {
    let k = s.len();
    let mut acc = vec![C64::new(0.0, 0.0); v.len()];
    for j in 0..16 {
        let u = rotation(s, 2.0 * PI * j as f64 / 16.0);
        let uc = conj(&u);
        let mut w = v.to_vec();
        for (c, m) in [&u, &u, &uc, &uc].into_iter().enumerate() {
            w = apply_copy(m, c, k, &w);
        }
        for (a, b) in acc.iter_mut().zip(&w) {
            *a += b / 16.0;
        }
    }
    acc
}

/// Site-major (qubit 4s+c) to copy-major (qubit k·c+s) index map.
fn copy_major_index(i: usize, n: usize) -> usize {
    let nq = 4 * n;
    let mut j = 0;
    for q in 0..nq {
        if (i >> (nq - 1 - q)) & 1 == 1 {
            let (s, c) = (q / 4, q % 4);
            j |= 1 << (nq - 1 - (n * c + s));
        }
    }
    j
}

fn oracle_projector(s: &str, v: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut cm = vec![C64::new(0.0, 0.0); v.len()];
    for (i, &x) in v.iter().enumerate() {
        cm[copy_major_index(i, n)] = C64::new(x, 0.0);
    }
    let out = averaged(s, &cm);
    (0..v.len()).map(|i| {
        let c = out[copy_major_index(i, n)];
        assert!(c.im.abs() < 1e-12);
        c.re
    }).collect()
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

#[test]
fn site_projectors_match_angle_average() {
    let sp = moments::site_projectors();
    for (m, s) in [(&sp.px, "X"), (&sp.pz, "Z"), (&sp.pxz, "XZ"), (&sp.pzx, "ZX")] {
        let d = m.len();
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let col = oracle_projector(s, &e);
            for i in 0..d {
                assert!((col[i] - m[i][j]).abs() < 1e-12, "{s} ({i},{j})");
            }
        }
    }
}

#[test]
fn site_projectors_are_projectors() {
    let sp = moments::site_projectors();
    for m in [&sp.px, &sp.pz, &sp.pzxz, &sp.pxz, &sp.pzx] {
        let m2 = matmul(m, m);
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert!((m2[i][j] - m[i][j]).abs() < 1e-12);
                assert!((m[i][j] - m[j][i]).abs() < 1e-12);
            }
        }
    }
    let tr: f64 = (0..16).map(|i| sp.pz[i][i]).sum();
    assert_eq!(tr, 6.0);
    for i in 0..16 {
        for j in 0..16 {
            let v = sp.pz[i][j];
            assert!(if i == j { v == 0.0 || v == 1.0 } else { v == 0.0 });
        }
    }
}

#[test]
fn projectors_absorb_their_rotations() {
    // P (e^{iφZ})^{⊗2,2} P = P for the diagonal projector
    let sp = moments::site_projectors();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let ph = [phi, phi, -phi, -phi];
        for i in 0..16 {
            // diagonal phase on |b0 b1 b2 b3⟩
            let mut a = 0.0;
            for c in 0..4 {
                let s = if (i >> (3 - c)) & 1 == 0 { 1.0 } else { -1.0 };
                a += s * ph[c];
            }
            let val = C64::from_polar(sp.pz[i][i], a) * sp.pz[i][i];
            assert!((val - C64::new(sp.pz[i][i], 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn transfer_matches_dense_oracle_at_three_sites() {
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let strings = ["XII", "IXI", "IIX", "ZII", "IZI", "IIZ", "XZI", "ZXZ", "IZX"];
    for _ in 0..5 {
        let v = random_vec(&mut rng, 4096);
        let mut want = v.clone();
        for s in strings {
            want = oracle_projector(s, &want);
        }
        let got = moments::apply_t(&v, n).unwrap();
        assert!(max_diff(&got, &want) < 1e-12);
    }
}

#[test]
fn transfer_fixes_haar_states() {
    for n in 2..=4 {
        let t = TransferOperator::new(Encoding::Full, n);
        for site in [moments::psi0_full(), moments::psi1_full()] {
            let v = moments::product_state(&site, n);
            let mut y = vec![0.0; v.len()];
            t.apply(&v, &mut y);
            assert!(max_diff(&v, &y) < 1e-12);
        }
    }
    assert!(moments::apply_t(&[0.0; 10], 2).is_err());
}

#[test]
fn sector_and_full_agree() {
    for n in [2usize, 3] {
        let full = moments::g_norm_with(Encoding::Full, n, 1, LayerForm::Grouped, 1e-10).unwrap();
        let sec = moments::g_norm(n, 1, 1e-10).unwrap();
        assert!((full.g - sec.g).abs() < 1e-7, "n={n}: {} vs {}", full.g, sec.g);
    }
}

#[test]
fn haar_projector_properties() {
    for n in 1..=4 {
        let h = HaarProjector::new(Encoding::Full, n);
        let want = 0.5f64.powi(n as i32);
        assert!((h.gram[0][1] - want).abs() < 1e-15 && (h.gram[0][0] - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let v = random_vec(&mut rng, 16usize.pow(n as u32));
        let (mut a, mut b) = (vec![0.0; v.len()], vec![0.0; v.len()]);
        h.apply(&v, &mut a);
        h.apply(&a, &mut b);
        assert!(max_diff(&a, &b) < 1e-10);
        if n >= 2 {
            let t = TransferOperator::new(Encoding::Full, n);
            let mut ta = vec![0.0; v.len()];
            t.apply(&a, &mut ta);
            assert!(max_diff(&ta, &a) < 1e-10);
            let (mut tv, mut htv) = (vec![0.0; v.len()], vec![0.0; v.len()]);
            t.apply(&v, &mut tv);
            h.apply(&tv, &mut htv);
            assert!(max_diff(&htv, &a) < 1e-10);
        }
    }
}

#[test]
fn overlap_identity() {
    let s = [moments::psi0_full(), moments::psi1_full(), moments::psi_phi_full()];
    assert_eq!(dot(&s[0], &s[1]), 0.5);
    assert!((dot(&s[2], &s[2]) - 1.0).abs() < 1e-15);
    for sigma in &s {
        for k in 1..=12 {
            let total: f64 = s.iter().map(|t| dot(sigma, t).abs().powi(k)).sum();
            assert!((total - (1.0 + 2.0 / 2f64.powi(k))).abs() < 1e-12);
        }
    }
}

#[test]
fn reorder_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let v = random_vec(&mut rng, 4096);
    let cm = moments::to_copy_major(&v, 3);
    assert!((dot(&cm, &cm) - dot(&v, &v)).abs() < 1e-9);
    assert_eq!(moments::to_site_major(&cm, 3), v);
    for i in [1usize, 77, 4095] {
        assert_eq!(cm[copy_major_index(i, 3)], v[i]);
    }
}

#[test]
fn composition_and_removal() {
    let g1 = moments::g_norm(3, 1, 1e-10).unwrap().g;
    let g2 = moments::g_norm(3, 2, 1e-10).unwrap().g;
    assert!(g2 <= g1 * g1 + 1e-10);
    let conj = moments::g_norm_with(Encoding::Sector, 3, 1, LayerForm::Conjugated, 1e-10).unwrap().g;
    assert!((conj - g1).abs() <= 1e-8);
    assert!((0.0..=2.0).contains(&g1));
}

#[test]
fn g_matches_dense_assembly() {
    for k in 1..=2 {
        let it = moments::g_norm(3, k, 1e-10).unwrap().g;
        let dense = moments::g_dense(Encoding::Sector, 3, k, LayerForm::Grouped).unwrap();
        assert!((it - dense).abs() < 1e-8);
    }
}

#[test]
fn second_moment_basics() {
    assert!((moments::haar_moment(2) - 0.1).abs() < 1e-15);
    for n in 1..=4 {
        let m0 = moments::second_moment(n, 0, 0).unwrap();
        assert!((m0 - 4f64.powi(-(n as i32))).abs() < 1e-15);
    }
    // x-independence
    let a = moments::second_moment(3, 2, 0).unwrap();
    for x in 1..8 {
        assert!((moments::second_moment(3, 2, x).unwrap() - a).abs() < 1e-14);
    }
}

#[test]
fn second_moment_contracts_toward_haar() {
    let g = moments::g_norm(3, 1, 1e-10).unwrap().g;
    let target = moments::haar_moment(3);
    let trace = moments::second_moment_trace(3, 6, 0).unwrap();
    let dev: Vec<f64> = trace.iter().map(|r| (r.moment - target).abs()).collect();
    for w in dev.windows(2) {
        assert!(w[1] < w[0]);
        assert!(w[1] / w[0] <= g + 1e-12);
    }
}

#[test]
fn second_moment_matches_monte_carlo() {
    use tidesign::arch::EffectiveCircuit;
    use tidesign::sim::{self, StateVector};
    let (n, layers) = (3, 4);
    let exact = moments::second_moment_layers(n, layers, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let s = 40000;
    let mut acc = 0.0;
    let mut acc2 = 0.0;
    for _ in 0..s {
        let c = EffectiveCircuit::random(n, layers, &mut rng);
        let p = sim::run_effective(&c, &StateVector::plus(n)).unwrap().amps[0].norm_sqr();
        acc += p * p;
        acc2 += p.powi(4);
    }
    let mean = acc / s as f64;
    let se = ((acc2 / s as f64 - mean * mean) / s as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} ± {se}");
}

#[test]
fn design_depth_values() {
    let c = moments::design_coefficient(0.111 / 32.0).unwrap();
    assert!((c - 15567.567).abs() < 0.01);
    assert!((moments::design_coefficient(0.11).unwrap() - 490.909).abs() < 0.01);
    let d = moments::design_depth(5, 1.0, 0.5).unwrap();
    assert_eq!(d, (108.0 * 20.0f64).ceil() as u64);
    assert!(moments::design_depth(5, 0.1, 0.0).is_err());
    assert!(moments::design_depth(5, 0.0, 0.1).is_err());
}
