//! Lattice architecture, Ising couplings, random phases and the effective circuit.
//!
//! Vertices are indexed row-major: vertex `(r, c)` has index `r·m + c`.
//! Effective-circuit convention: column `j` of the lattice feeds layer `j` with
//! angle `β̃ = −β/2 (mod 2π)` on row `i`; the first `m−1` columns form the
//! depth-`(m−1)` circuit and the last column is kept as a readout layer.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub n: usize,
    pub m: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Lattice {
    pub fn num_vertices(&self) -> usize {
        self.n * self.m
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.m + col
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vertices()];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }
}

pub fn build_lattice(n: usize, m: usize) -> Result<Lattice> {
    if n == 0 || m == 0 {
        return invalid("lattice dimensions must be positive");
    }
    let mut edges = Vec::new();
    for r in 0..n {
        for c in 0..m {
            let v = r * m + c;
            if c + 1 < m {
                edges.push((v, v + 1));
            }
            if r + 1 < n {
                edges.push((v, v + m));
            }
        }
    }
    edges.sort_unstable();
    Ok(Lattice { n, m, edges })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingSpec {
    /// Coupling per edge, aligned with `Lattice::edges`.
    pub couplings: Vec<f64>,
    /// Field per vertex.
    pub fields: Vec<f64>,
}

/// Default couplings `J = π/4`, `h_i = (π/4)·deg(i)`.
pub fn ising_spec(lattice: &Lattice) -> IsingSpec {
    IsingSpec {
        couplings: vec![FRAC_PI_4; lattice.edges.len()],
        fields: lattice.degrees().iter().map(|&d| FRAC_PI_4 * d as f64).collect(),
    }
}

impl IsingSpec {
    /// Energy `H(x) = Σ J z_a z_b − Σ h_a z_a` with `z = 1 − 2x`, for a
    /// big-endian basis index over `lattice.num_vertices()` qubits.
    pub fn energy(&self, lattice: &Lattice, x: usize) -> f64 {
        let nv = lattice.num_vertices();
        let z = |v: usize| if (x >> (nv - 1 - v)) & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for (k, &(a, b)) in lattice.edges.iter().enumerate() {
            e += self.couplings[k] * z(a) * z(b);
        }
        for v in 0..nv {
            e -= self.fields[v] * z(v);
        }
        e
    }
}

/// Phase assignment in the physical picture (`n·m` angles, vertex order) or the
/// effective picture (`n·(m−1)` angles, layer-major: index `l·n + i`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseAssignment {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub beta: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseKind {
    Physical,
    Effective,
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Uniform angles in `[0, 2π)` drawn from a ChaCha stream.
pub fn random_angles(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| wrap_angle(rng.random::<f64>() * TAU)).collect()
}

impl PhaseAssignment {
    pub fn random_physical(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return invalid("lattice dimensions must be positive");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(PhaseAssignment { n, m, seed, beta: random_angles(&mut rng, n * m) })
    }

    pub fn random_effective(n: usize, depth: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return invalid("qubit count must be positive");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(PhaseAssignment { n, m: depth + 1, seed, beta: random_angles(&mut rng, n * depth) })
    }

    pub fn from_angles(n: usize, m: usize, seed: u64, beta: Vec<f64>) -> Result<Self> {
        let p = PhaseAssignment { n, m, seed, beta: beta.into_iter().map(wrap_angle).collect() };
        p.kind()?;
        Ok(p)
    }

    pub fn kind(&self) -> Result<PhaseKind> {
        if self.n == 0 || self.m == 0 {
            return invalid("lattice dimensions must be positive");
        }
        if self.beta.len() == self.n * self.m {
            Ok(PhaseKind::Physical)
        } else if self.beta.len() == self.n * (self.m - 1) {
            Ok(PhaseKind::Effective)
        } else {
            invalid(format!(
                "expected {} or {} angles, got {}",
                self.n * self.m,
                self.n * (self.m - 1),
                self.beta.len()
            ))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("phase assignment serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: PhaseAssignment =
            serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        if p.beta.iter().any(|b| !(0.0..TAU).contains(b)) {
            return invalid("angles must lie in [0, 2π)");
        }
        p.kind()?;
        Ok(p)
    }
}

/// Layers of `∏ e^{iβ̃ Z}` each followed by `E = (∏H)(∏CZ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCircuit {
    pub n: usize,
    pub layers: Vec<Vec<f64>>,
    /// Angles of the last lattice column, applied as one more layer before readout.
    pub readout: Option<Vec<f64>>,
}

impl EffectiveCircuit {
    pub fn new(n: usize, layers: Vec<Vec<f64>>) -> Result<Self> {
        if layers.iter().any(|l| l.len() != n) {
            return invalid("every layer needs one angle per qubit");
        }
        Ok(EffectiveCircuit { n, layers, readout: None })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Layers actually applied, readout included.
    pub fn all_layers(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.layers.iter().chain(self.readout.iter())
    }

    pub fn random(n: usize, depth: usize, rng: &mut impl Rng) -> Self {
        let layers = (0..depth).map(|_| random_angles(rng, n)).collect();
        EffectiveCircuit { n, layers, readout: None }
    }
}

/// Effective-picture angle of a physical preparation angle.
pub fn effective_angle(beta: f64) -> f64 {
    wrap_angle(-beta / 2.0)
}

pub fn to_effective_circuit(lattice: &Lattice, phases: &PhaseAssignment) -> Result<EffectiveCircuit> {
    if lattice.m < 2 {
        return invalid("m = 1 has no effective depth");
    }
    if phases.n != lattice.n || phases.m != lattice.m {
        return invalid("phase assignment does not match the lattice");
    }
    let (n, m) = (lattice.n, lattice.m);
    match phases.kind()? {
        PhaseKind::Physical => {
            let column = |c: usize| -> Vec<f64> {
                (0..n).map(|r| effective_angle(phases.beta[lattice.index(r, c)])).collect()
            };
            Ok(EffectiveCircuit {
                n,
                layers: (0..m - 1).map(column).collect(),
                readout: Some(column(m - 1)),
            })
        }
        PhaseKind::Effective => Ok(EffectiveCircuit {
            n,
            layers: phases.beta.chunks(n).map(|c| c.to_vec()).collect(),
            readout: None,
        }),
    }
}

/// Shifts angles so that outcome `y` under `phases` becomes outcome `0…0`.
///
/// Physical assignments take `|y| = n·m` and shift `β_v` by `π`; effective
/// assignments take `|y| = n` and shift the last layer by `π/2`.
pub fn hide_outcome(phases: &PhaseAssignment, y: &[bool]) -> Result<PhaseAssignment> {
    let mut out = phases.clone();
    match phases.kind()? {
        PhaseKind::Physical => {
            if y.len() != phases.beta.len() {
                return invalid("outcome length must equal the number of lattice qubits");
            }
            for (b, &bit) in out.beta.iter_mut().zip(y) {
                if bit {
                    *b = wrap_angle(*b + PI);
                }
            }
        }
        PhaseKind::Effective => {
            if y.len() != phases.n {
                return invalid("outcome length must equal the number of circuit qubits");
            }
            if phases.m < 2 {
                return invalid("empty circuit cannot hide an outcome");
            }
            let last = (phases.m - 2) * phases.n;
            for (i, &bit) in y.iter().enumerate() {
                if bit {
                    out.beta[last + i] = wrap_angle(out.beta[last + i] + FRAC_PI_2);
                }
            }
        }
    }
    Ok(out)
}

/// Hides `y` directly on a circuit: adds `π/2` to the final applied layer.
pub fn hide_circuit(circuit: &EffectiveCircuit, y: &[bool]) -> Result<EffectiveCircuit> {
    if y.len() != circuit.n {
        return invalid("outcome length must equal the number of circuit qubits");
    }
    let mut out = circuit.clone();
    let last = match out.readout.as_mut() {
        Some(r) => r,
        None => match out.layers.last_mut() {
            Some(l) => l,
            None => return invalid("empty circuit cannot hide an outcome"),
        },
    };
    for (a, &bit) in last.iter_mut().zip(y) {
        if bit {
            *a = wrap_angle(*a + FRAC_PI_2);
        }
    }
    Ok(out)
}

/// Big-endian bits of `x` over `len` positions.
pub fn bits_of(x: usize, len: usize) -> Vec<bool> {
    (0..len).map(|i| (x >> (len - 1 - i)) & 1 == 1).collect()
}
