//! Second-moment (`⊗2,2`) operators: averaged Pauli projectors, the layer
//! transfer operator `T_n`, the Haar projector and the TPE quantity `g`.
//!
//! Site-major layout: site `s`, copy `c` is qubit `4s + c` (qubit 0 most
//! significant) with copies ordered `(U, U, U*, U*)`.
//!
//! Every operator here commutes with the per-site symmetries `X^{⊗4}` and
//! `Z^{⊗4}`, and all quantities of interest live in their joint `+1` sector.
//! `Encoding::Sector` keeps only that sector: per site the basis
//! `f_r = (|r⟩ + |r̄⟩)/√2` for `r ∈ {0000, 0011, 0101, 0110}`, i.e. two bits
//! `(u, w) = (b0⊕b1, b0⊕b2)` per site and dimension `4^n`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::exec::{self, dot, CHUNK};
use crate::linalg::{self, LanczosOptions, LanczosStats};
use crate::pauli::PauliSum;
use crate::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Full,
    Sector,
}

pub const SECTOR_REPS: [usize; 4] = [0b0000, 0b0011, 0b0101, 0b0110];

impl Encoding {
    pub fn site_bits(self) -> usize {
        match self {
            Encoding::Full => 4,
            Encoding::Sector => 2,
        }
    }

    pub fn site_dim(self) -> usize {
        1 << self.site_bits()
    }

    pub fn nbits(self, n: usize) -> usize {
        self.site_bits() * n
    }

    pub fn dim(self, n: usize) -> usize {
        1 << self.nbits(n)
    }

    fn shift(self, n: usize, s: usize) -> usize {
        self.site_bits() * (n - 1 - s)
    }

    /// Parity of `Σ_c b_{a,c} b_{b,c}` for the 4-copy bits of sites `a`, `b`.
    fn cz_parity(self, n: usize, i: usize, a: usize, b: usize) -> bool {
        let mask = self.site_dim() - 1;
        let ra = (i >> self.shift(n, a)) & mask;
        let rb = (i >> self.shift(n, b)) & mask;
        match self {
            Encoding::Full => (ra & rb).count_ones() & 1 == 1,
            Encoding::Sector => (SECTOR_REPS[ra] & SECTOR_REPS[rb]).count_ones() & 1 == 1,
        }
    }
}

// Copy pairs with their weight in the averaged projector.
const PAIRS: [((usize, usize), f64); 6] =
    [((0, 1), -1.0), ((2, 3), -1.0), ((0, 2), 1.0), ((0, 3), 1.0), ((1, 2), 1.0), ((1, 3), 1.0)];

/// Averaged projector `(1/2π)∫(e^{iφP})^{⊗2,2}dφ` for the string `P` with `X`
/// on sites `xs` and `Z` on sites `zs`.
pub fn projector(enc: Encoding, n: usize, xs: &[usize], zs: &[usize]) -> PauliSum {
    assert!(xs.iter().chain(zs).all(|&s| s < n), "site out of range");
    assert!(xs.iter().all(|s| !zs.contains(s)), "X and Z sites overlap");
    let nbits = enc.nbits(n);
    let mut p = PauliSum::zero(nbits);
    match enc {
        Encoding::Full => {
            let copy_mask = |sites: &[usize], c: usize| -> u64 {
                sites.iter().map(|&s| 1u64 << (nbits - 1 - (4 * s + c))).fold(0, |a, b| a | b)
            };
            let xm: Vec<u64> = (0..4).map(|c| copy_mask(xs, c)).collect();
            let zm: Vec<u64> = (0..4).map(|c| copy_mask(zs, c)).collect();
            p.push(0, 0, 3.0 / 8.0);
            p.push(xm.iter().fold(0, |a, b| a | b), zm.iter().fold(0, |a, b| a | b), 3.0 / 8.0);
            for &((a, b), w) in &PAIRS {
                p.push(xm[a] | xm[b], zm[a] | zm[b], w / 8.0);
            }
        }
        Encoding::Sector => {
            // pair types on (u, w): A=(0,1) X:w Z:u; B=(0,2) X:u Z:w; C=(0,3) X:uw Z:uw
            let site_mask = |sites: &[usize], code: u64| -> u64 {
                sites.iter().map(|&s| code << (2 * (n - 1 - s))).fold(0, |a, b| a | b)
            };
            let types = [(0b01u64, 0b10u64, -0.25), (0b10, 0b01, 0.25), (0b11, 0b11, 0.25)];
            p.push(0, 0, 0.75);
            for &(xc, zc, w) in &types {
                p.push(site_mask(xs, xc), site_mask(zs, zc), w);
            }
        }
    }
    p.simplify()
}

/// `1 − P` for the same string.
pub fn term(enc: Encoding, n: usize, xs: &[usize], zs: &[usize]) -> PauliSum {
    PauliSum::identity(enc.nbits(n)).add(&projector(enc, n, xs, zs).scaled(-1.0))
}

/// Single-site vectors, full 16-dimensional form.
pub fn psi0_full() -> Vec<f64> {
    let mut v = vec![0.0; 16];
    for b in [0b0000, 0b0101, 0b1010, 0b1111] {
        v[b] = 0.5;
    }
    v
}

pub fn psi1_full() -> Vec<f64> {
    let mut v = vec![0.0; 16];
    for b in [0b0000, 0b0110, 0b1001, 0b1111] {
        v[b] = 0.5;
    }
    v
}

pub fn psi_phi_full() -> Vec<f64> {
    psi0_full().iter().zip(psi1_full()).map(|(a, b)| a - b).collect()
}

/// Coordinates of a 16-vector after projection onto the sector (`W^T v`).
pub fn to_sector_site(v: &[f64]) -> Vec<f64> {
    assert_eq!(v.len(), 16);
    SECTOR_REPS.iter().map(|&r| (v[r] + v[r ^ 15]) * FRAC_1_SQRT_2).collect()
}

/// Site vector in the requested encoding.
pub fn site_vector(enc: Encoding, full: &[f64]) -> Vec<f64> {
    match enc {
        Encoding::Full => full.to_vec(),
        Encoding::Sector => to_sector_site(full),
    }
}

pub fn product_state(site: &[f64], n: usize) -> Vec<f64> {
    let mut v = vec![1.0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(v.len() * site.len());
        for a in &v {
            next.extend(site.iter().map(|b| a * b));
        }
        v = next;
    }
    v
}

/// `|x⟩^{⊗4}` for an `n`-bit big-endian string, site-major.
pub fn basis_moment(enc: Encoding, n: usize, x: usize) -> Vec<f64> {
    let mut v = vec![1.0];
    for s in 0..n {
        let bit = (x >> (n - 1 - s)) & 1;
        let mut site = vec![0.0; 16];
        site[if bit == 1 { 15 } else { 0 }] = 1.0;
        let site = site_vector(enc, &site);
        let mut next = Vec::with_capacity(v.len() * site.len());
        for a in &v {
            next.extend(site.iter().map(|b| a * b));
        }
        v = next;
    }
    v
}

/// `|+^n⟩^{⊗4}`, site-major.
pub fn plus_moment(enc: Encoding, n: usize) -> Vec<f64> {
    product_state(&site_vector(enc, &[0.25; 16]), n)
}

/// Reorders a full-encoding vector from site-major to copy-major
/// (copy `c`, site `s` at qubit `n·c + s`).
pub fn to_copy_major(v: &[f64], n: usize) -> Vec<f64> {
    permute_qubits(v, 4 * n, |q| (q % 4) * n + q / 4)
}

/// Inverse of [`to_copy_major`].
pub fn to_site_major(v: &[f64], n: usize) -> Vec<f64> {
    permute_qubits(v, 4 * n, |q| (q % n) * 4 + q / n)
}

fn permute_qubits(v: &[f64], nq: usize, dest: impl Fn(usize) -> usize) -> Vec<f64> {
    assert_eq!(v.len(), 1 << nq, "length must be 16^n");
    let map: Vec<usize> = (0..nq).map(dest).collect();
    let mut out = vec![0.0; v.len()];
    for (i, &a) in v.iter().enumerate() {
        let mut j = 0usize;
        for (q, &d) in map.iter().enumerate() {
            if (i >> (nq - 1 - q)) & 1 == 1 {
                j |= 1 << (nq - 1 - d);
            }
        }
        out[j] = a;
    }
    out
}

/// Dense single-site and boundary projectors in the full encoding.
#[derive(Clone, Debug)]
pub struct SiteProjectors {
    pub px: Vec<Vec<f64>>,
    pub pz: Vec<Vec<f64>>,
    /// `P^{ZXZ}` on three sites in the sector encoding (64×64).
    pub pzxz: Vec<Vec<f64>>,
    /// `P^{ZXZ}` on three sites in the full encoding, as a signed-permutation sum.
    pub pzxz_full: PauliSum,
    /// Boundary `X₁Z₂` and `Z_{n−1}X_n` on two sites (256×256).
    pub pxz: Vec<Vec<f64>>,
    pub pzx: Vec<Vec<f64>>,
}

pub fn site_projectors() -> SiteProjectors {
    SiteProjectors {
        px: projector(Encoding::Full, 1, &[0], &[]).to_dense(),
        pz: projector(Encoding::Full, 1, &[], &[0]).to_dense(),
        pzxz: projector(Encoding::Sector, 3, &[1], &[0, 2]).to_dense(),
        pzxz_full: projector(Encoding::Full, 3, &[1], &[0, 2]),
        pxz: projector(Encoding::Full, 2, &[0], &[1]).to_dense(),
        pzx: projector(Encoding::Full, 2, &[1], &[0]).to_dense(),
    }
}

/// Sites `(xs, zs)` of the `ZXZ` string at site `i` with the boundary convention
/// `ZXZ_1 = X₁Z₂`, `ZXZ_n = Z_{n−1}X_n` (0-based sites).
pub fn zxz_sites(n: usize, i: usize) -> (Vec<usize>, Vec<usize>) {
    let mut zs = Vec::new();
    if i > 0 {
        zs.push(i - 1);
    }
    if i + 1 < n {
        zs.push(i + 1);
    }
    (vec![i], zs)
}

/// `T_n = (∏P^{ZXZ})(∏P^Z)(∏P^X)`, applied matrix-free.
#[derive(Clone, Debug)]
pub struct TransferOperator {
    pub enc: Encoding,
    pub n: usize,
    px: Vec<PauliSum>,
    pz: Vec<PauliSum>,
    pzxz: Vec<PauliSum>,
}

impl TransferOperator {
    pub fn new(enc: Encoding, n: usize) -> Self {
        let px = (0..n).map(|i| projector(enc, n, &[i], &[])).collect();
        let pz = (0..n).map(|i| projector(enc, n, &[], &[i])).collect();
        let pzxz = if n >= 2 {
            (0..n)
                .map(|i| {
                    let (xs, zs) = zxz_sites(n, i);
                    projector(enc, n, &xs, &zs)
                })
                .collect()
        } else {
            Vec::new()
        };
        TransferOperator { enc, n, px, pz, pzxz }
    }

    pub fn dim(&self) -> usize {
        self.enc.dim(self.n)
    }

    fn run<'a>(ops: impl Iterator<Item = &'a PauliSum>, x: &[f64], y: &mut [f64]) {
        let mut cur = x.to_vec();
        let mut tmp = vec![0.0; x.len()];
        for p in ops {
            p.apply_in_place(&mut cur, &mut tmp);
        }
        y.copy_from_slice(&cur);
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        Self::run(self.px.iter().chain(&self.pz).chain(&self.pzxz), x, y);
    }

    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        Self::run(self.pzxz.iter().chain(&self.pz).chain(&self.px), x, y);
    }

    /// `∏ P^Z` only.
    pub fn apply_z(&self, x: &[f64], y: &mut [f64]) {
        Self::run(self.pz.iter(), x, y);
    }
}

/// `T_n` on a full-encoding state of length `16^n`.
pub fn apply_t(state: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 || state.len() != Encoding::Full.dim(n) {
        return invalid("state length must be 16^n");
    }
    let t = TransferOperator::new(Encoding::Full, n);
    let mut out = vec![0.0; state.len()];
    t.apply(state, &mut out);
    Ok(out)
}

/// `E^{⊗2,2}` with `E = (∏H)(∏CZ)` on the open chain.
#[derive(Clone, Debug)]
pub struct Entangler {
    pub enc: Encoding,
    pub n: usize,
    hsite: Vec<f64>,
}

impl Entangler {
    pub fn new(enc: Encoding, n: usize) -> Self {
        // sector: W^T H^{⊗4} W has entries (−1)^{|r∧t|}/2
        let hsite = SECTOR_REPS
            .iter()
            .flat_map(|&t| {
                SECTOR_REPS.iter().map(move |&r| if (r & t).count_ones() % 2 == 1 { -0.5 } else { 0.5 })
            })
            .collect();
        Entangler { enc, n, hsite }
    }

    pub fn apply_cz(&self, v: &mut [f64]) {
        apply_cz_pairs(self.enc, self.n, &chain_pairs(self.n), v);
    }

    pub fn apply_h(&self, x: &[f64], y: &mut [f64]) {
        match self.enc {
            Encoding::Full => {
                let nb = 4 * self.n;
                let mut cur = x.to_vec();
                for q in 0..nb {
                    hadamard_bit(&cur, y, 1 << (nb - 1 - q));
                    cur.copy_from_slice(y);
                }
            }
            Encoding::Sector => {
                let mut cur = x.to_vec();
                for s in 0..self.n {
                    apply_site_matrix(self.enc, self.n, s, &self.hsite, &cur, y);
                    cur.copy_from_slice(y);
                }
            }
        }
    }

    /// `y = E x` (CZ first, then Hadamards).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = x.to_vec();
        self.apply_cz(&mut t);
        self.apply_h(&t, y);
    }

    /// `y = E^T x`.
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.apply_h(x, y);
        self.apply_cz(y);
    }
}

pub fn chain_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()
}

/// Diagonal `∏ CZ_{a,b}^{⊗4}` over the listed site pairs.
pub fn apply_cz_pairs(enc: Encoding, n: usize, pairs: &[(usize, usize)], v: &mut [f64]) {
    assert_eq!(v.len(), enc.dim(n));
    if pairs.is_empty() {
        return;
    }
    exec::for_chunks_mut(v, |c, s| {
        let base = c * CHUNK;
        for (k, a) in s.iter_mut().enumerate() {
            let i = base + k;
            let odd = pairs.iter().filter(|&&(p, q)| enc.cz_parity(n, i, p, q)).count() % 2 == 1;
            if odd {
                *a = -*a;
            }
        }
    });
}

fn hadamard_bit(x: &[f64], y: &mut [f64], bit: usize) {
    exec::for_chunks_mut(y, |c, s| {
        let base = c * CHUNK;
        for (k, out) in s.iter_mut().enumerate() {
            let i = base + k;
            let (lo, hi) = (x[i & !bit], x[i | bit]);
            *out = if i & bit == 0 { (lo + hi) * FRAC_1_SQRT_2 } else { (lo - hi) * FRAC_1_SQRT_2 };
        }
    });
}

/// `y = (1 ⊗ M_s ⊗ 1) x` for a row-major site matrix.
pub fn apply_site_matrix(enc: Encoding, n: usize, s: usize, m: &[f64], x: &[f64], y: &mut [f64]) {
    let d = enc.site_dim();
    assert_eq!(m.len(), d * d);
    let stride = 1usize << enc.shift(n, s);
    exec::for_chunks_mut(y, |c, out| {
        let base = c * CHUNK;
        for (k, o) in out.iter_mut().enumerate() {
            let i = base + k;
            let a = (i / stride) % d;
            let root = i - a * stride;
            let row = &m[a * d..(a + 1) * d];
            *o = row.iter().enumerate().map(|(b, w)| w * x[root + b * stride]).sum();
        }
    });
}

/// Projector onto `span{ψ0^{⊗n}, ψ1^{⊗n}}`, the second-moment Haar projector.
#[derive(Clone, Debug)]
pub struct HaarProjector {
    pub enc: Encoding,
    pub n: usize,
    pub basis: [Vec<f64>; 2],
    pub gram: [[f64; 2]; 2],
    pub gram_inv: [[f64; 2]; 2],
}

impl HaarProjector {
    pub fn new(enc: Encoding, n: usize) -> Self {
        let b0 = product_state(&site_vector(enc, &psi0_full()), n);
        let b1 = product_state(&site_vector(enc, &psi1_full()), n);
        let g01 = dot(&b0, &b1);
        let gram = [[dot(&b0, &b0), g01], [g01, dot(&b1, &b1)]];
        let det = gram[0][0] * gram[1][1] - g01 * g01;
        let gram_inv = [[gram[1][1] / det, -g01 / det], [-g01 / det, gram[0][0] / det]];
        HaarProjector { enc, n, basis: [b0, b1], gram, gram_inv }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let c = [dot(&self.basis[0], x), dot(&self.basis[1], x)];
        let a0 = self.gram_inv[0][0] * c[0] + self.gram_inv[0][1] * c[1];
        let a1 = self.gram_inv[1][0] * c[0] + self.gram_inv[1][1] * c[1];
        let (b0, b1) = (&self.basis[0], &self.basis[1]);
        exec::for_chunks_mut(y, |ch, s| {
            let base = ch * CHUNK;
            for (k, o) in s.iter_mut().enumerate() {
                *o = a0 * b0[base + k] + a1 * b1[base + k];
            }
        });
    }
}

/// How one random layer is grouped when measuring `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerForm {
    /// `T_n` itself.
    Grouped,
    /// `E² T_n E`, three circuit layers.
    Conjugated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpeReport {
    pub n: usize,
    pub k: usize,
    pub g: f64,
    pub residual: f64,
    pub iters: usize,
}

/// `A = L^k − P_Haar` for the chosen layer form, with its transpose.
pub struct DeviationOperator {
    pub t: TransferOperator,
    pub e: Entangler,
    pub haar: HaarProjector,
    pub k: usize,
    pub form: LayerForm,
}

impl DeviationOperator {
    pub fn new(enc: Encoding, n: usize, k: usize, form: LayerForm) -> Self {
        DeviationOperator {
            t: TransferOperator::new(enc, n),
            e: Entangler::new(enc, n),
            haar: HaarProjector::new(enc, n),
            k,
            form,
        }
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    fn layer(&self, x: &[f64], y: &mut [f64]) {
        match self.form {
            LayerForm::Grouped => self.t.apply(x, y),
            LayerForm::Conjugated => {
                let mut a = vec![0.0; x.len()];
                self.e.apply(x, &mut a);
                self.t.apply(&a, y);
                self.e.apply(y, &mut a);
                self.e.apply(&a, y);
            }
        }
    }

    fn layer_transpose(&self, x: &[f64], y: &mut [f64]) {
        match self.form {
            LayerForm::Grouped => self.t.apply_transpose(x, y),
            LayerForm::Conjugated => {
                let mut a = vec![0.0; x.len()];
                self.e.apply_transpose(x, &mut a);
                self.e.apply_transpose(&a, y);
                self.t.apply_transpose(y, &mut a);
                self.e.apply_transpose(&a, y);
            }
        }
    }

    fn power(&self, x: &[f64], y: &mut [f64], transpose: bool) {
        let mut cur = x.to_vec();
        for _ in 0..self.k {
            if transpose {
                self.layer_transpose(&cur, y);
            } else {
                self.layer(&cur, y);
            }
            cur.copy_from_slice(y);
        }
        y.copy_from_slice(&cur);
        let mut h = vec![0.0; x.len()];
        self.haar.apply(x, &mut h);
        exec::axpy(-1.0, &h, y);
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.power(x, y, false);
    }

    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.power(x, y, true);
    }
}

/// `g(v^{*k}, 2) = ‖T_n^k − P_Haar‖_∞` in the sector encoding.
pub fn g_norm(n: usize, k: usize, tol: f64) -> Result<TpeReport> {
    g_norm_with(Encoding::Sector, n, k, LayerForm::Grouped, tol)
}

/// Largest singular value of `L^k − P_Haar` from a Krylov iteration on `AᵀA`.
pub fn g_norm_with(enc: Encoding, n: usize, k: usize, form: LayerForm, tol: f64) -> Result<TpeReport> {
    if !(2..=5).contains(&n) && !(enc == Encoding::Sector && (2..=8).contains(&n)) {
        return invalid("g_norm supports n in [2, 5]");
    }
    if k == 0 {
        return invalid("k must be at least 1");
    }
    let op = DeviationOperator::new(enc, n, k, form);
    let dim = op.dim();
    let ata = |x: &[f64], y: &mut [f64]| {
        let mut a = vec![0.0; x.len()];
        op.apply(x, &mut a);
        op.apply_transpose(&a, y);
    };
    let opts = LanczosOptions { tol, max_basis: 40, keep: 6, ..Default::default() };
    let mut stats = LanczosStats::default();
    let top = linalg::largest_eigenvalue(dim, &ata, &opts, &mut stats)?;
    if top.residual > 10.0 * tol {
        return Err(Error::NonConvergence { iterations: stats.matvecs, residual: top.residual });
    }
    Ok(TpeReport { n, k, g: top.value.max(0.0).sqrt(), residual: top.residual, iters: stats.matvecs })
}

/// Dense `‖L^k − P_Haar‖` by assembling the operator; small `n` only.
pub fn g_dense(enc: Encoding, n: usize, k: usize, form: LayerForm) -> Result<f64> {
    let op = DeviationOperator::new(enc, n, k, form);
    if op.dim() > 1024 {
        return Err(Error::Budget("dense assembly limited to dimension 1024".into()));
    }
    let m = linalg::assemble(op.dim(), &|x: &[f64], y: &mut [f64]| op.apply(x, y));
    Ok(linalg::spectral_norm(&m))
}

/// Haar fourth moment `E|⟨x|U|ψ⟩|⁴ = 2/(N(N+1))`.
pub fn haar_moment(n: usize) -> f64 {
    let nn = (1u64 << n) as f64;
    2.0 / (nn * (nn + 1.0))
}

/// `E|⟨x|U|+^n⟩|⁴` after `layers` random circuit layers `E·∏e^{iβZ}`,
/// computed exactly as `⟨x^{⊗4}|(E^{⊗2,2} ∏P^Z)^{layers}|+^{⊗4}⟩`.
///
/// The value is the same for every `x`: flipping output bits is undone by
/// shifting angles, which leaves the angle distribution invariant.
pub fn second_moment_layers(n: usize, layers: usize, x: usize) -> Result<f64> {
    let v = evolve_plus(n, layers)?;
    if x >= 1 << n {
        return invalid("bitstring out of range");
    }
    Ok(dot(&basis_moment(Encoding::Sector, n, x), &v))
}

/// Expected collision probability `Σ_x E[p_x²]` after `layers` layers.
pub fn collision_expectation(n: usize, layers: usize) -> Result<f64> {
    Ok((1u64 << n) as f64 * second_moment_layers(n, layers, 0)?)
}

fn evolve_plus(n: usize, layers: usize) -> Result<Vec<f64>> {
    if n == 0 || n > 10 {
        return invalid("second moments support 1 ≤ n ≤ 10");
    }
    let t = TransferOperator::new(Encoding::Sector, n);
    let e = Entangler::new(Encoding::Sector, n);
    let mut v = plus_moment(Encoding::Sector, n);
    let mut tmp = vec![0.0; v.len()];
    for _ in 0..layers {
        t.apply_z(&v, &mut tmp);
        e.apply(&tmp, &mut v);
    }
    Ok(v)
}

/// Second moment after `k` groups of three layers (`(E²T_nE)^k`).
pub fn second_moment(n: usize, k: usize, x: usize) -> Result<f64> {
    second_moment_layers(n, 3 * k, x)
}

/// `⟨x^{⊗4}|T_n^k|+^{⊗4}⟩`: the literal grouped-layer contraction.
pub fn second_moment_grouped(n: usize, k: usize, x: usize) -> Result<f64> {
    if n == 0 || n > 10 || x >= 1 << n {
        return invalid("bad size or bitstring");
    }
    let t = TransferOperator::new(Encoding::Sector, n);
    let mut v = plus_moment(Encoding::Sector, n);
    let mut tmp = vec![0.0; v.len()];
    for _ in 0..k {
        t.apply(&v, &mut tmp);
        std::mem::swap(&mut v, &mut tmp);
    }
    Ok(dot(&basis_moment(Encoding::Sector, n, x), &v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub k: usize,
    pub moment: f64,
    pub haar_target: f64,
}

pub fn second_moment_trace(n: usize, kmax: usize, x: usize) -> Result<Vec<MomentRecord>> {
    (0..=kmax)
        .map(|k| Ok(MomentRecord { k, moment: second_moment(n, k, x)?, haar_target: haar_moment(n) }))
        .collect()
}

/// Relative second-moment excess `ε = max(0, E[p²]/Haar − 1)` after `layers` layers.
pub fn moment_epsilon(n: usize, layers: usize) -> Result<f64> {
    Ok((second_moment_layers(n, layers, 0)? / haar_moment(n) - 1.0).max(0.0))
}

/// `54/Δ`, the depth per unit of `4n + ln(1/ε)`.
pub fn design_coefficient(gap: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return invalid("gap must be positive");
    }
    Ok(54.0 / gap)
}

/// `⌈54 (4n + ln(1/ε)) / Δ⌉`.
pub fn design_depth(n: usize, eps: f64, gap: f64) -> Result<u64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return invalid("eps must lie in (0, 1]");
    }
    let c = design_coefficient(gap)?;
    Ok((c * (4.0 * n as f64 + (1.0 / eps).ln())).ceil() as u64)
}
