//! Prime-field arithmetic, polynomials over `F_p` and Berlekamp–Welch decoding.

use serde::{Deserialize, Serialize};

use crate::{invalid, Error, Result};

/// The Mersenne prime `2^61 − 1`.
pub const P61: u64 = (1 << 61) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    pub p: u64,
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

impl Field {
    pub fn new(p: u64) -> Result<Field> {
        if !is_prime(p) {
            return invalid(format!("{p} is not prime"));
        }
        Ok(Field { p })
    }

    pub fn p61() -> Field {
        Field { p: P61 }
    }

    pub fn elem(&self, v: u64) -> u64 {
        v % self.p
    }

    /// Residue of a signed integer.
    pub fn from_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.p as i128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.p as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mulmod(a, b, self.p)
    }

    pub fn pow(&self, b: u64, e: u64) -> u64 {
        powmod(b, e, self.p)
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a % self.p == 0 {
            return invalid("zero has no inverse");
        }
        Ok(self.pow(a, self.p - 2))
    }
}

/// Polynomial with coefficients in `F_p`, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldPoly {
    pub coeffs: Vec<u64>,
}

impl FieldPoly {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FieldPoly { coeffs }
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, f: &Field, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Quotient and remainder of `self / d`.
    pub fn divrem(&self, f: &Field, d: &FieldPoly) -> Result<(FieldPoly, FieldPoly)> {
        let dd = d.degree().ok_or_else(|| Error::InvalidArgument("division by zero polynomial".into()))?;
        let lead_inv = f.inv(d.coeffs[dd])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((FieldPoly::new(vec![]), FieldPoly::new(rem)));
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = f.mul(rem[i + dd], lead_inv);
            quot[i] = c;
            if c != 0 {
                for (j, &dc) in d.coeffs.iter().enumerate() {
                    rem[i + j] = f.sub(rem[i + j], f.mul(c, dc));
                }
            }
        }
        rem.truncate(dd);
        Ok((FieldPoly::new(quot), FieldPoly::new(rem)))
    }
}

/// Solves `A u = b` over `F_p`; free variables are set to zero. `None` if inconsistent.
pub fn solve_linear(f: &Field, mut a: Vec<Vec<u64>>, mut b: Vec<u64>) -> Result<Option<Vec<u64>>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, pr);
        b.swap(r, pr);
        let inv = f.inv(a[r][c])?;
        for j in c..cols {
            a[r][j] = f.mul(a[r][j], inv);
        }
        b[r] = f.mul(b[r], inv);
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let fac = a[i][c];
                for j in c..cols {
                    a[i][j] = f.sub(a[i][j], f.mul(fac, a[r][j]));
                }
                b[i] = f.sub(b[i], f.mul(fac, b[r]));
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|&v| v != 0) {
        return Ok(None);
    }
    let mut u = vec![0u64; cols];
    for (i, &c) in pivots.iter().enumerate() {
        u[c] = b[i];
    }
    Ok(Some(u))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    pub poly: FieldPoly,
    pub error_positions: Vec<usize>,
    pub error_budget: usize,
}

/// Recovers the degree-`≤ d` polynomial through at least
/// `k − ⌊(k−d−1)/2⌋` of the `k` points, or reports failure.
pub fn berlekamp_welch(f: &Field, points: &[(u64, u64)], d: usize) -> Result<Decoded> {
    let k = points.len();
    if k < d + 1 {
        return invalid(format!("need at least {} points, got {k}", d + 1));
    }
    let mut xs: Vec<u64> = points.iter().map(|p| f.elem(p.0)).collect();
    xs.sort_unstable();
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return invalid("sample points must be distinct");
    }
    let e = (k - d - 1) / 2;
    let nq = d + e + 1;
    let mut a = Vec::with_capacity(k);
    let mut b = Vec::with_capacity(k);
    for &(x, y) in points {
        let (x, y) = (f.elem(x), f.elem(y));
        let mut row = Vec::with_capacity(nq + e);
        let mut xp = 1u64;
        let mut pw = Vec::with_capacity(nq);
        for _ in 0..nq {
            pw.push(xp);
            xp = f.mul(xp, x);
        }
        row.extend_from_slice(&pw);
        for &p in pw.iter().take(e) {
            row.push(f.neg(f.mul(y, p)));
        }
        a.push(row);
        b.push(f.mul(y, pw[e]));
    }
    let sol = solve_linear(f, a, b)?
        .ok_or_else(|| Error::DecodeFailure("key equation has no solution".into()))?;
    let q = FieldPoly::new(sol[..nq].to_vec());
    let mut ec = sol[nq..].to_vec();
    ec.push(1);
    let locator = FieldPoly::new(ec);
    let (quot, rem) = q.divrem(f, &locator)?;
    if rem.degree().is_some() {
        return Err(Error::DecodeFailure("error locator does not divide Q".into()));
    }
    if quot.degree().is_some_and(|dq| dq > d) {
        return Err(Error::DecodeFailure("quotient exceeds the degree bound".into()));
    }
    let error_positions: Vec<usize> =
        points.iter().enumerate().filter(|(_, &(x, y))| quot.eval(f, f.elem(x)) != f.elem(y)).map(|(i, _)| i).collect();
    if error_positions.len() > e {
        return Err(Error::DecodeFailure(format!(
            "{} disagreements exceed the {e}-error budget",
            error_positions.len()
        )));
    }
    Ok(Decoded { poly: quot, error_positions, error_budget: e })
}
