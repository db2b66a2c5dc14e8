use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tidesign::field::{self, Field, FieldPoly};
use tidesign::Error;

fn random_poly(f: &Field, d: usize, rng: &mut ChaCha8Rng) -> FieldPoly {
    let mut c: Vec<u64> = (0..=d).map(|_| rng.random_range(0..f.p)).collect();
    c[d] = rng.random_range(1..f.p);
    FieldPoly::new(c)
}

fn corrupted_points(f: &Field, q: &FieldPoly, k: usize, errors: usize, rng: &mut ChaCha8Rng) -> (Vec<(u64, u64)>, Vec<usize>) {
    let xs: Vec<u64> = sample(rng, 1 << 20, k).into_iter().map(|x| x as u64 + 1).collect();
    let mut pts: Vec<(u64, u64)> = xs.iter().map(|&x| (x, q.eval(f, x))).collect();
    let mut bad: Vec<usize> = sample(rng, k, errors).into_vec();
    bad.sort_unstable();
    for &i in &bad {
        pts[i].1 = f.add(pts[i].1, rng.random_range(1..f.p));
    }
    (pts, bad)
}

#[test]
fn arithmetic_is_exact() {
    let f = Field::p61();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let a = rng.random_range(1..f.p);
        let b = rng.random_range(0..f.p);
        assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        assert_eq!(f.add(f.sub(b, a), a), b);
        assert_eq!(f.add(a, f.neg(a)), 0);
        let expect = ((a as u128 * b as u128) % f.p as u128) as u64;
        assert_eq!(f.mul(a, b), expect);
    }
    assert!(f.inv(0).is_err());
    assert!(Field::new(15).is_err());
    assert!(Field::new(65537).is_ok());
}

#[test]
fn degree_is_last_nonzero() {
    assert_eq!(FieldPoly::new(vec![1, 2, 0, 0]).degree(), Some(1));
    assert_eq!(FieldPoly::new(vec![0, 0]).degree(), None);
}

#[test]
fn interpolation_without_errors() {
    let f = Field::p61();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in 0..8 {
        let q = random_poly(&f, d, &mut rng);
        let (pts, _) = corrupted_points(&f, &q, d + 1, 0, &mut rng);
        let dec = field::berlekamp_welch(&f, &pts, d).unwrap();
        assert_eq!(dec.poly, q);
        assert!(dec.error_positions.is_empty());
    }
}

#[test]
fn decodes_at_the_radius() {
    let f = Field::p61();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (d, k, e) = (5, 20, 7);
    for _ in 0..1000 {
        let q = random_poly(&f, d, &mut rng);
        let (pts, bad) = corrupted_points(&f, &q, k, e, &mut rng);
        let dec = field::berlekamp_welch(&f, &pts, d).unwrap();
        assert_eq!(dec.poly, q);
        assert_eq!(dec.error_positions, bad);
        assert_eq!(dec.error_budget, 7);
    }
}

#[test]
fn reports_failure_past_the_radius() {
    let f = Field::p61();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let q = random_poly(&f, 5, &mut rng);
        let (pts, _) = corrupted_points(&f, &q, 20, 8, &mut rng);
        match field::berlekamp_welch(&f, &pts, 5) {
            Err(Error::DecodeFailure(_)) => {}
            Ok(dec) => assert_ne!(dec.poly, q, "beyond the radius yet decoded to the truth"),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    let f = Field::p61();
    assert!(field::berlekamp_welch(&f, &[(1, 2), (1, 3)], 0).is_err());
    assert!(field::berlekamp_welch(&f, &[(1, 2)], 3).is_err());
}
