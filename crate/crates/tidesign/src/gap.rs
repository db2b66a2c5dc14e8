//! Frustration-free Hamiltonians on the moment space and their spectral gaps.
//!
//! Sites are 0-based here. `Full` is `Σ(1−P^X_i) + Σ(1−P^Z_i) + Σ(1−P^{ZXZ}_i)`
//! with `ZXZ_0 = X₀Z₁` and `ZXZ_{n−1} = Z_{n−2}X_{n−1}`; `LeftOpen` drops the
//! right boundary term, `Bulk` drops both, `BulkConjugated` is the CZ-rotated
//! bulk chain built from `Z`, `XZ` and `ZX` terms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{dot, norm};
use crate::linalg::{self, LanczosOptions, LanczosStats};
use crate::moments::{self, Encoding};
use crate::pauli::PauliSum;
use crate::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Full,
    LeftOpen,
    Bulk,
    BulkConjugated,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Full, Variant::LeftOpen, Variant::Bulk, Variant::BulkConjugated];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::LeftOpen => "leftopen",
            Variant::Bulk => "bulk",
            Variant::BulkConjugated => "bulkconjugated",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "full" => Ok(Variant::Full),
            "leftopen" | "left" => Ok(Variant::LeftOpen),
            "bulk" => Ok(Variant::Bulk),
            "bulkconjugated" | "conjugated" | "tilde" => Ok(Variant::BulkConjugated),
            other => invalid(format!("unknown variant {other}")),
        }
    }

    /// Expected ground-space dimension.
    pub fn ground_dim(self) -> usize {
        match self {
            Variant::Full | Variant::LeftOpen => 2,
            Variant::Bulk | Variant::BulkConjugated => 3,
        }
    }
}

/// `(X sites, Z sites)` of every term of the variant.
pub fn terms(n: usize, variant: Variant) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut t = Vec::new();
    match variant {
        Variant::BulkConjugated => {
            t.extend((0..n).map(|i| (vec![], vec![i])));
            for i in 0..n.saturating_sub(1) {
                t.push((vec![i], vec![i + 1]));
                t.push((vec![i + 1], vec![i]));
            }
        }
        _ => {
            t.extend((0..n).map(|i| (vec![i], vec![])));
            t.extend((0..n).map(|i| (vec![], vec![i])));
            for i in 0..n {
                let left_edge = i == 0;
                let right_edge = i + 1 == n;
                let keep = match variant {
                    Variant::Full => true,
                    Variant::LeftOpen => !right_edge,
                    _ => !left_edge && !right_edge,
                };
                if keep && n >= 2 {
                    t.push(moments::zxz_sites(n, i));
                }
            }
        }
    }
    t
}

#[derive(Clone, Debug)]
pub struct MatrixFreeOperator {
    pub variant: Variant,
    pub n: usize,
    pub enc: Encoding,
    pub sum: PauliSum,
}

impl MatrixFreeOperator {
    pub fn dim(&self) -> usize {
        self.enc.dim(self.n)
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.sum.apply(x, y);
    }

    /// `max |⟨y,Ax⟩ − ⟨Ay,x⟩|` over random probe pairs.
    pub fn symmetry_defect(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        let (mut ax, mut ay) = (vec![0.0; dim], vec![0.0; dim]);
        for _ in 0..probes {
            let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
            let y: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
            self.apply(&x, &mut ax);
            self.apply(&y, &mut ay);
            worst = worst.max((dot(&y, &ax) - dot(&ay, &x)).abs());
        }
        worst
    }
}

/// Operator on the full `16^n` moment space.
pub fn build_operator(n: usize, variant: Variant) -> Result<MatrixFreeOperator> {
    build_operator_in(Encoding::Full, n, variant)
}

pub fn build_operator_in(enc: Encoding, n: usize, variant: Variant) -> Result<MatrixFreeOperator> {
    let max = match enc {
        Encoding::Full => 7,
        Encoding::Sector => 10,
    };
    if !(2..=max).contains(&n) {
        return invalid(format!("n must lie in [2, {max}], got {n}"));
    }
    let mut sum = PauliSum::zero(enc.nbits(n));
    for (xs, zs) in terms(n, variant) {
        sum = sum.add(&moments::term(enc, n, &xs, &zs));
    }
    Ok(MatrixFreeOperator { variant, n, enc, sum })
}

/// Site pairs of `V_n = ∏_{i=1}^{⌊n/2⌋} CZ_{2i−1,2i}` (1-based), 0-based here.
pub fn conjugation_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect()
}

/// Analytic ground vectors `ψ0^{⊗n}`, `ψ1^{⊗n}` (and `ψφ^{⊗n}` for bulk
/// variants), each normalized. For `BulkConjugated` the bulk vectors are
/// rotated by `V_n^{⊗2,2}`.
pub fn ground_basis(n: usize, variant: Variant) -> Vec<Vec<f64>> {
    ground_basis_in(Encoding::Full, n, variant)
}

pub fn ground_basis_in(enc: Encoding, n: usize, variant: Variant) -> Vec<Vec<f64>> {
    let mut sites = vec![moments::psi0_full(), moments::psi1_full()];
    if matches!(variant, Variant::Bulk | Variant::BulkConjugated) {
        sites.push(moments::psi_phi_full());
    }
    sites
        .iter()
        .map(|s| {
            let mut v = moments::product_state(&moments::site_vector(enc, s), n);
            if variant == Variant::BulkConjugated {
                moments::apply_cz_pairs(enc, n, &conjugation_pairs(n), &mut v);
            }
            let nv = norm(&v);
            v.iter_mut().for_each(|a| *a /= nv);
            v
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugationCheck {
    pub n: usize,
    /// `max ‖(V H^B V† − H̃^B)x‖/‖x‖` over probes.
    pub max_deviation: f64,
    /// `max ‖V V† x − x‖/‖x‖` over probes.
    pub unitarity_deviation: f64,
}

pub fn cz_conjugation_check(n: usize, probes: usize, seed: u64) -> Result<ConjugationCheck> {
    cz_conjugation_check_in(Encoding::Full, n, probes, seed)
}

pub fn cz_conjugation_check_in(enc: Encoding, n: usize, probes: usize, seed: u64) -> Result<ConjugationCheck> {
    if enc == Encoding::Full && n > 4 {
        return invalid("full-space conjugation check supports n ≤ 4");
    }
    let hb = build_operator_in(enc, n, Variant::Bulk)?;
    let ht = build_operator_in(enc, n, Variant::BulkConjugated)?;
    let pairs = conjugation_pairs(n);
    let dim = enc.dim(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut a, mut b) = (vec![0.0; dim], vec![0.0; dim]);
    let (mut dev, mut unit): (f64, f64) = (0.0, 0.0);
    for _ in 0..probes {
        let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let nx = norm(&x);
        // V is a real diagonal ±1, so V† = V
        let mut vx = x.clone();
        moments::apply_cz_pairs(enc, n, &pairs, &mut vx);
        hb.apply(&vx, &mut a);
        moments::apply_cz_pairs(enc, n, &pairs, &mut a);
        ht.apply(&x, &mut b);
        let d: f64 = a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        dev = dev.max(d / nx);
        moments::apply_cz_pairs(enc, n, &pairs, &mut vx);
        let u: f64 = vx.iter().zip(&x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        unit = unit.max(u / nx);
    }
    Ok(ConjugationCheck { n, max_deviation: dev, unitarity_deviation: unit })
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    pub tol: f64,
    pub threshold: f64,
    /// Largest number of eigenvalues computed while looking for the gap.
    pub max_eigenvalues: usize,
    pub lanczos: LanczosOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { tol: 1e-8, threshold: 1e-6, max_eigenvalues: 8, lanczos: LanczosOptions::default() }
    }
}

impl SpectrumOptions {
    /// Basis sizes that fit the given dimension in memory.
    pub fn for_dim(dim: usize) -> Self {
        let mut o = SpectrumOptions::default();
        if dim >= 1 << 24 {
            o.lanczos.max_basis = 12;
            o.lanczos.keep = 4;
        } else if dim >= 1 << 20 {
            o.lanczos.max_basis = 24;
            o.lanczos.keep = 6;
        }
        o
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    pub variant: Variant,
    pub encoding: Encoding,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Analytic ground vectors that were verified and deflated.
    pub analytic_ground: usize,
    pub degeneracy: usize,
    pub gap: f64,
    pub tol: f64,
    pub threshold: f64,
    pub iters: usize,
    pub restarts: usize,
    pub seconds: f64,
}

/// Lowest `k` eigenvalues, deflating the verified analytic ground vectors and
/// continuing until the first eigenvalue above the threshold is found.
pub fn lowest_spectrum(op: &MatrixFreeOperator, k: usize, opts: &SpectrumOptions) -> Result<GapReport> {
    if k == 0 || k > 8 {
        return invalid("k must lie in [1, 8]");
    }
    if opts.tol < 1e-10 {
        return invalid("tol must be at least 1e-10");
    }
    let start = Instant::now();
    let dim = op.dim();
    let mut ground: Vec<Vec<f64>> = Vec::new();
    let mut hv = vec![0.0; dim];
    for v in ground_basis_in(op.enc, op.n, op.variant) {
        op.apply(&v, &mut hv);
        if norm(&hv) <= opts.tol {
            ground.push(v);
        }
    }
    linalg::orthonormalize(&mut ground);
    let mut eigenvalues = Vec::new();
    let mut residuals = Vec::new();
    for v in &ground {
        op.apply(v, &mut hv);
        let rq = dot(v, &hv);
        eigenvalues.push(rq);
        let r: f64 = hv.iter().zip(v).map(|(h, a)| (h - rq * a).powi(2)).sum::<f64>().sqrt();
        residuals.push(r);
    }
    let analytic = ground.len();
    let mut lopts = opts.lanczos;
    lopts.tol = opts.tol;
    let mut stats = LanczosStats::default();
    let mut locked = ground.clone();
    let apply = |x: &[f64], y: &mut [f64]| op.apply(x, y);
    let cap = opts.max_eigenvalues.max(k);
    loop {
        let have_gap = eigenvalues.iter().any(|&e| e >= opts.threshold);
        if (eigenvalues.len() >= k && have_gap) || eigenvalues.len() >= cap || locked.len() >= dim {
            break;
        }
        let pair = linalg::lowest_eigenpair(dim, &apply, &locked, &lopts, &mut stats)?;
        eigenvalues.push(pair.value);
        residuals.push(pair.residual);
        let mut v = pair.vector;
        for l in &locked {
            let c = dot(l, &v);
            crate::exec::axpy(-c, l, &mut v);
        }
        let nv = norm(&v);
        v.iter_mut().for_each(|a| *a /= nv);
        locked.push(v);
    }
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| eigenvalues[i]).collect();
    let residuals: Vec<f64> = idx.iter().map(|&i| residuals[i]).collect();
    let degeneracy = eigenvalues.iter().filter(|&&e| e < opts.threshold).count();
    let gap = eigenvalues.iter().copied().find(|&e| e >= opts.threshold).ok_or(Error::NonConvergence {
        iterations: stats.matvecs,
        residual: f64::NAN,
    })?;
    Ok(GapReport {
        n: op.n,
        variant: op.variant,
        encoding: op.enc,
        eigenvalues,
        residuals,
        analytic_ground: analytic,
        degeneracy,
        gap,
        tol: opts.tol,
        threshold: opts.threshold,
        iters: stats.matvecs,
        restarts: stats.restarts,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Gap of one variant in the given encoding with default solver settings.
pub fn compute_gap(enc: Encoding, n: usize, variant: Variant, k: usize) -> Result<GapReport> {
    let op = build_operator_in(enc, n, variant)?;
    lowest_spectrum(&op, k, &SpectrumOptions::for_dim(op.dim()))
}

/// CSV in the layout `n,gap_bulk,gap_full`, with `gap_<variant>` columns
/// appended for any other variant present. Missing entries are empty cells.
pub fn gap_table_csv(reports: &[GapReport], bulk: Variant) -> String {
    let mut cols = vec![bulk, Variant::Full];
    for v in Variant::ALL {
        if !cols.contains(&v) && reports.iter().any(|r| r.variant == v) {
            cols.push(v);
        }
    }
    let mut rows: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
    for r in reports {
        if let Some(c) = cols.iter().position(|&v| v == r.variant) {
            rows.entry(r.n).or_insert_with(|| vec![None; cols.len()])[c] = Some(r.gap);
        }
    }
    let mut s = String::from("n,gap_bulk,gap_full");
    for v in &cols[2..] {
        let _ = write!(s, ",gap_{}", v.name());
    }
    s.push('\n');
    for (n, cells) in rows {
        let _ = write!(s, "{n}");
        for c in cells {
            let _ = write!(s, ",{}", c.map(|g| format!("{g:.6}")).unwrap_or_default());
        }
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NachtergaeleReport {
    pub l: usize,
    pub q_l: usize,
    pub eps_l: f64,
    pub condition_threshold: f64,
    pub half_condition_holds: bool,
    pub d: usize,
    pub gamma: f64,
    /// `(γ/d)(1 − ε√(l+1))²`
    pub bound: f64,
    /// `γ/32`
    pub bound_quoted: f64,
    pub depth_coefficient: f64,
    pub depth_coefficient_quoted: f64,
}

/// Evaluates the martingale lower bound from `Δ(H^B_{l+1})`.
pub fn nachtergaele_bound(gap_table: &BTreeMap<usize, f64>, l: usize, q_l: Option<usize>) -> Result<NachtergaeleReport> {
    if l == 0 {
        return invalid("l must be at least 1");
    }
    let gamma = *gap_table
        .get(&(l + 1))
        .ok_or_else(|| Error::InvalidArgument(format!("gap table lacks n = {}", l + 1)))?;
    let eps = 8.5 / 2f64.powi(l as i32);
    let root = ((l + 1) as f64).sqrt();
    let threshold = 1.0 / root;
    if eps >= threshold {
        return Err(Error::ConditionViolated(format!("eps_l = {eps} ≥ 1/√(l+1) = {threshold}")));
    }
    let d = l + 2;
    let bound = gamma / d as f64 * (1.0 - eps * root).powi(2);
    let bound_quoted = gamma / 32.0;
    Ok(NachtergaeleReport {
        l,
        q_l: q_l.unwrap_or(l + 2),
        eps_l: eps,
        condition_threshold: threshold,
        half_condition_holds: eps <= 0.5 * threshold,
        d,
        gamma,
        bound,
        bound_quoted,
        depth_coefficient: moments::design_coefficient(bound)?,
        depth_coefficient_quoted: moments::design_coefficient(bound_quoted)?,
    })
}

fn block_projector(vectors: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = vectors.len();
    let dim = vectors[0].len();
    let b = DMatrix::from_fn(dim, r, |i, j| vectors[j][i]);
    let g = b.transpose() * &b;
    let sv = g.clone().singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, c), &s| (a.max(s), c.min(s)));
    let cond = smax / smin;
    if !(cond <= 1e12) {
        return Err(Error::IllConditioned(cond));
    }
    let ginv = g.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    Ok(&b * ginv * b.transpose())
}

/// `‖G^B_{[q−l+1,q+1]}(G^L_{[1,q]} − G^L_{[1,q+1]})‖_∞` on `q+1` sites (1-based intervals).
pub fn overlap_epsilon(q: usize, l: usize) -> Result<f64> {
    if q + 1 > 5 {
        return Err(Error::Budget("q + 1 ≤ 5 required for dense projectors".into()));
    }
    if l == 0 || l > q {
        return invalid("need 1 ≤ l ≤ q");
    }
    let site = |v: Vec<f64>| moments::to_sector_site(&v);
    let (p0, p1, pf) = (site(moments::psi0_full()), site(moments::psi1_full()), site(moments::psi_phi_full()));
    let eye = |k: usize| DMatrix::<f64>::identity(4usize.pow(k as u32), 4usize.pow(k as u32));
    let span_l = |len: usize| -> Result<DMatrix<f64>> {
        block_projector(&[moments::product_state(&p0, len), moments::product_state(&p1, len)])
    };
    let gl_q = span_l(q)?.kronecker(&eye(1));
    let gl_q1 = span_l(q + 1)?;
    let gb_block = block_projector(&[
        moments::product_state(&p0, l + 1),
        moments::product_state(&p1, l + 1),
        moments::product_state(&pf, l + 1),
    ])?;
    let gb = eye(q - l).kronecker(&gb_block);
    let m = gb * (gl_q - gl_q1);
    let dim = m.nrows();
    let mt = m.transpose();
    let mtm = |x: &[f64], y: &mut [f64]| {
        let xv = nalgebra::DVector::from_column_slice(x);
        let r = &mt * (&m * xv);
        y.copy_from_slice(r.as_slice());
    };
    let mut stats = LanczosStats::default();
    let opts = LanczosOptions { tol: 1e-12, max_basis: 30.min(dim), keep: 4, ..Default::default() };
    let top = linalg::largest_eigenvalue(dim, &mtm, &opts, &mut stats)?;
    Ok(top.value.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_counts() {
        assert_eq!(terms(4, Variant::Full).len(), 12);
        assert_eq!(terms(4, Variant::LeftOpen).len(), 11);
        assert_eq!(terms(4, Variant::Bulk).len(), 10);
        assert_eq!(terms(4, Variant::BulkConjugated).len(), 10);
        assert_eq!(terms(2, Variant::Full)[4], (vec![0], vec![1]));
    }

    #[test]
    fn parse_names() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()).unwrap(), v);
        }
        assert!(Variant::parse("nope").is_err());
    }
}
