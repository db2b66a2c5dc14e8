//! Real signed-permutation kernels for sums of X/Z Pauli strings.
//!
//! A term `(x, z, c)` acts as `c · X^x Z^z`, i.e. `|i⟩ ↦ c (−1)^{|i∧z|} |i⊕x⟩`.
//! Bit `q` of a mask refers to qubit `q` counted from the most significant end.

use std::collections::BTreeMap;

use crate::exec;

/// One signed permutation with a real weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub x: u64,
    pub z: u64,
    pub coeff: f64,
}

/// Sum of weighted X/Z strings on `nbits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    pub nbits: usize,
    pub terms: Vec<Term>,
}

impl PauliSum {
    pub fn zero(nbits: usize) -> Self {
        assert!(nbits <= 40, "index space too large");
        PauliSum { nbits, terms: Vec::new() }
    }

    pub fn identity(nbits: usize) -> Self {
        let mut s = Self::zero(nbits);
        s.push(0, 0, 1.0);
        s
    }

    pub fn dim(&self) -> usize {
        1usize << self.nbits
    }

    pub fn push(&mut self, x: u64, z: u64, coeff: f64) {
        self.terms.push(Term { x, z, coeff });
    }

    /// Merges equal strings and drops vanishing weights.
    pub fn simplify(mut self) -> Self {
        let mut acc: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry((t.x, t.z)).or_insert(0.0) += t.coeff;
        }
        self.terms = acc
            .into_iter()
            .filter(|(_, c)| c.abs() > 1e-15)
            .map(|((x, z), coeff)| Term { x, z, coeff })
            .collect();
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.coeff *= s);
        self
    }

    pub fn add(mut self, other: &PauliSum) -> Self {
        assert_eq!(self.nbits, other.nbits);
        self.terms.extend_from_slice(&other.terms);
        self.simplify()
    }

    /// `y = A x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let dim = self.dim();
        assert_eq!(x.len(), dim, "input length mismatch");
        assert_eq!(y.len(), dim, "output length mismatch");
        let terms: Vec<(u64, u64, f64)> = self
            .terms
            .iter()
            .map(|t| {
                let c = if (t.x & t.z).count_ones() % 2 == 1 { -t.coeff } else { t.coeff };
                (t.x, t.z, c)
            })
            .collect();
        exec::for_chunks_mut(y, |c, out| {
            let base = (c * exec::CHUNK) as u64;
            out.iter_mut().for_each(|v| *v = 0.0);
            for &(xm, zm, coeff) in &terms {
                if xm == 0 && zm == 0 {
                    for (k, v) in out.iter_mut().enumerate() {
                        *v += coeff * x[base as usize + k];
                    }
                    continue;
                }
                for (k, v) in out.iter_mut().enumerate() {
                    let j = base + k as u64;
                    let s = if (j & zm).count_ones() & 1 == 1 { -coeff } else { coeff };
                    *v += s * x[(j ^ xm) as usize];
                }
            }
        });
    }

    /// In-place application using a scratch buffer.
    pub fn apply_in_place(&self, v: &mut Vec<f64>, scratch: &mut Vec<f64>) {
        scratch.resize(v.len(), 0.0);
        self.apply(v, scratch);
        std::mem::swap(v, scratch);
    }

    /// Dense matrix, row-major. Only for small index spaces.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        assert!(dim <= 1 << 13, "dense assembly too large");
        let mut m = vec![vec![0.0; dim]; dim];
        for t in &self.terms {
            for i in 0..dim as u64 {
                let s = if (i & t.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                m[(i ^ t.x) as usize][i as usize] += s * t.coeff;
            }
        }
        m
    }
}

/// Bit mask for qubit `q` out of `nbits`, qubit 0 being the most significant.
pub fn qubit_mask(nbits: usize, q: usize) -> u64 {
    assert!(q < nbits);
    1u64 << (nbits - 1 - q)
}
