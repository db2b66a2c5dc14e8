//! Dense statevector simulation of effective circuits and physical lattices.
//!
//! Qubit 0 is the most significant bit of a basis index.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arch::{EffectiveCircuit, IsingSpec, Lattice, PhaseAssignment, PhaseKind};
use crate::{invalid, Error, Result, C64};

pub const MAX_QUBITS: usize = 24;
pub const MAX_PHYSICAL: usize = 20;
pub const MAX_PATH_BITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn basis(n: usize, x: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[x] = C64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn plus(n: usize) -> Self {
        let a = (0.5f64).powf(n as f64 / 2.0);
        StateVector { n, amps: vec![C64::new(a, 0.0); 1 << n] }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn stride(&self, q: usize) -> usize {
        assert!(q < self.n, "qubit out of range");
        1 << (self.n - 1 - q)
    }

    /// Diagonal single-qubit gate `diag(d0, d1)`.
    pub fn apply_diag(&mut self, q: usize, d0: C64, d1: C64) {
        let s = self.stride(q);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & s == 0 { d0 } else { d1 };
        }
    }

    /// `∏_i e^{iα_i Z_i}` in one pass.
    pub fn apply_z_layer(&mut self, angles: &[f64]) {
        assert_eq!(angles.len(), self.n);
        let n = self.n;
        let phases: Vec<(C64, C64)> =
            angles.iter().map(|&a| (C64::from_polar(1.0, a), C64::from_polar(1.0, -a))).collect();
        for (i, a) in self.amps.iter_mut().enumerate() {
            let mut f = C64::new(1.0, 0.0);
            for (q, &(p0, p1)) in phases.iter().enumerate() {
                f *= if (i >> (n - 1 - q)) & 1 == 0 { p0 } else { p1 };
            }
            *a *= f;
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let m = self.stride(a) | self.stride(b);
        for (i, v) in self.amps.iter_mut().enumerate() {
            if i & m == m {
                *v = -*v;
            }
        }
    }

    /// `∏_{i} CZ_{i,i+1}` on the open chain.
    pub fn apply_cz_chain(&mut self) {
        let n = self.n;
        for (i, v) in self.amps.iter_mut().enumerate() {
            if (i & (i >> 1)).count_ones() & 1 == 1 {
                *v = -*v;
            }
        }
        debug_assert!(n > 0);
    }

    pub fn apply_h(&mut self, q: usize) {
        let s = self.stride(q);
        let h = FRAC_1_SQRT_2;
        for block in self.amps.chunks_mut(2 * s) {
            let (lo, hi) = block.split_at_mut(s);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * h;
                *b = (x - y) * h;
            }
        }
    }

    pub fn apply_h_all(&mut self) {
        for q in 0..self.n {
            self.apply_h(q);
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        let s = self.stride(q);
        for block in self.amps.chunks_mut(2 * s) {
            let (lo, hi) = block.split_at_mut(s);
            lo.swap_with_slice(hi);
        }
    }

    /// `X` on every qubit whose bit is set in the big-endian mask.
    pub fn apply_x_mask(&mut self, mask: usize) {
        if mask == 0 {
            return;
        }
        let old = self.amps.clone();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a = old[i ^ mask];
        }
    }

    /// `E = (∏ H)(∏ CZ)`: CZ chain first, then Hadamards.
    pub fn apply_entangler(&mut self) {
        self.apply_cz_chain();
        self.apply_h_all();
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub n: usize,
    pub probs: Vec<f64>,
}

impl ProbabilityTable {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn collision(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    pub fn total_variation(&self, other: &ProbabilityTable) -> f64 {
        0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bitstring,probability\n");
        for (x, p) in self.probs.iter().enumerate() {
            let _ = writeln!(s, "{:0width$b},{:.17e}", x, p, width = self.n.max(1));
        }
        s
    }
}

pub fn distribution(state: &StateVector) -> ProbabilityTable {
    ProbabilityTable { n: state.n, probs: state.amps.iter().map(|a| a.norm_sqr()).collect() }
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::Budget(format!("{n} qubits exceeds the {MAX_QUBITS}-qubit limit")));
    }
    Ok(())
}

pub fn run_effective(circuit: &EffectiveCircuit, input: &StateVector) -> Result<StateVector> {
    run_effective_with_byproducts(circuit, input, &[])
}

/// Runs the circuit, applying `X^{s_j}` after the entangler of layer `j`
/// (`s_j` a big-endian row mask); missing entries count as zero.
pub fn run_effective_with_byproducts(
    circuit: &EffectiveCircuit,
    input: &StateVector,
    outcomes: &[usize],
) -> Result<StateVector> {
    check_qubits(circuit.n)?;
    if input.n != circuit.n {
        return invalid("input state has the wrong qubit count");
    }
    let mut st = input.clone();
    for (j, layer) in circuit.all_layers().enumerate() {
        st.apply_z_layer(layer);
        st.apply_entangler();
        if let Some(&s) = outcomes.get(j) {
            st.apply_x_mask(s);
        }
    }
    Ok(st)
}

/// X-basis output distribution of the lattice after `e^{iH}` on `⊗ R(β)|+⟩`.
pub fn run_physical(lattice: &Lattice, spec: &IsingSpec, phases: &PhaseAssignment) -> Result<ProbabilityTable> {
    let nv = lattice.num_vertices();
    if nv > MAX_PHYSICAL {
        return Err(Error::Budget(format!("{nv} lattice qubits exceeds {MAX_PHYSICAL}")));
    }
    if phases.kind()? != PhaseKind::Physical || phases.n != lattice.n || phases.m != lattice.m {
        return invalid("physical phase assignment required");
    }
    let norm = (0.5f64).powf(nv as f64 / 2.0);
    let amps = (0..1usize << nv)
        .map(|x| {
            let mut phase = spec.energy(lattice, x);
            for v in 0..nv {
                if (x >> (nv - 1 - v)) & 1 == 1 {
                    phase += phases.beta[v];
                }
            }
            C64::from_polar(norm, phase)
        })
        .collect();
    let mut st = StateVector { n: nv, amps };
    st.apply_h_all();
    Ok(distribution(&st))
}

/// Lattice-ordered distribution obtained column by column through the circuit.
pub fn effective_lattice_distribution(lattice: &Lattice, circuit: &EffectiveCircuit) -> Result<ProbabilityTable> {
    let (n, m) = (lattice.n, lattice.m);
    let nv = n * m;
    if nv > MAX_PHYSICAL {
        return Err(Error::Budget(format!("{nv} lattice qubits exceeds {MAX_PHYSICAL}")));
    }
    if circuit.n != n || circuit.depth() + 1 != m || circuit.readout.is_none() {
        return invalid("circuit must come from this lattice");
    }
    let weight = (0.5f64).powi((n * (m - 1)) as i32);
    let mut probs = vec![0.0; 1 << nv];
    let plus = StateVector::plus(n);
    for xl in 0..1usize << (n * (m - 1)) {
        // column j outcome occupies bits j·n .. (j+1)·n of xl, big-endian
        let outcomes: Vec<usize> =
            (0..m - 1).map(|j| (xl >> (n * (m - 2 - j))) & ((1 << n) - 1)).collect();
        let st = run_effective_with_byproducts(circuit, &plus, &outcomes)?;
        for xr in 0..1usize << n {
            let mut idx = 0usize;
            for r in 0..n {
                for c in 0..m {
                    let bit = if c + 1 < m {
                        (outcomes[c] >> (n - 1 - r)) & 1
                    } else {
                        (xr >> (n - 1 - r)) & 1
                    };
                    idx |= bit << (nv - 1 - lattice.index(r, c));
                }
            }
            probs[idx] = weight * st.amps[xr].norm_sqr();
        }
    }
    Ok(ProbabilityTable { n: nv, probs })
}

/// `⟨x|U|+^n⟩` as an explicit sum over computational-basis paths.
pub fn feynman_amplitude(circuit: &EffectiveCircuit, x: usize) -> Result<C64> {
    let n = circuit.n;
    let layers: Vec<&Vec<f64>> = circuit.all_layers().collect();
    let depth = layers.len();
    if n * depth > MAX_PATH_BITS {
        return Err(Error::Budget(format!("2^{} paths exceeds the path budget", n * depth)));
    }
    if x >= 1 << n {
        return invalid("bitstring out of range");
    }
    let pre = (0.5f64).powf(n as f64 / 2.0);
    if depth == 0 {
        return Ok(C64::new(pre, 0.0));
    }
    // factor(l, y) = e^{iφ_l(y)} (−1)^{cz(y)}, transition sign (−1)^{y'·y}
    let dim = 1usize << n;
    let factors: Vec<Vec<C64>> = layers
        .iter()
        .map(|angles| {
            (0..dim)
                .map(|y| {
                    let mut phi = 0.0;
                    for (q, a) in angles.iter().enumerate() {
                        phi += if (y >> (n - 1 - q)) & 1 == 0 { *a } else { -*a };
                    }
                    let s = if (y & (y >> 1)).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                    C64::from_polar(s, phi)
                })
                .collect()
        })
        .collect();
    fn walk(l: usize, y: usize, acc: C64, x: usize, factors: &[Vec<C64>]) -> C64 {
        let f = acc * factors[l][y];
        if l + 1 == factors.len() {
            return if (x & y).count_ones() & 1 == 1 { -f } else { f };
        }
        let mut sum = C64::new(0.0, 0.0);
        for next in 0..factors[l].len() {
            let t = if (next & y).count_ones() & 1 == 1 { -f } else { f };
            sum += walk(l + 1, next, t, x, factors);
        }
        sum
    }
    let mut total = C64::new(0.0, 0.0);
    for y0 in 0..dim {
        total += walk(0, y0, C64::new(1.0, 0.0), x, &factors);
    }
    Ok(total * pre * pre.powi(depth as i32))
}
