//! Worst-to-average reduction pipeline: (θ,K)-truncated perturbed gates, the
//! polynomial `q(θ) = p_0(C′(θ))`, and its recovery from corrupted samples.
//!
//! Gate on row `i` of layer `l`:
//! `G(θ) = e^{iα Z} · e^{irZ} · Σ_{k≤K} (−iθrZ)^k/k!`, where `α` is the angle of
//! the fixed instance `C` and `e^{irZ}` the Haar draw. At `θ = 0` the gate is
//! `e^{i(α+r)Z}`; with `K = ∞` and `θ = 1` it is `e^{iαZ}`.
//! The generator `r` is taken in `(−π/2, π/2]`: shifting `r` by `π` only flips
//! the global sign of the gate, and the smaller branch keeps the series short.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arch::{random_angles, wrap_angle, EffectiveCircuit};
use crate::exec;
use crate::field::{self, Field, FieldPoly};
use crate::sim::{self, StateVector};
use crate::{invalid, Error, Result, C64};

/// Maps an angle to the branch `(−π/2, π/2]` modulo `π`.
pub fn reduce_generator(angle: f64) -> f64 {
    let r = (angle + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if r <= -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedGateSchedule {
    pub n: usize,
    /// Angles `α_{l,i}` of the worst-case instance `C`.
    pub base: Vec<Vec<f64>>,
    /// Haar generators `r_{l,i}`.
    pub haar: Vec<Vec<f64>>,
    pub k_trunc: usize,
}

impl TruncatedGateSchedule {
    pub fn new(base: Vec<Vec<f64>>, haar: Vec<Vec<f64>>, k_trunc: usize) -> Result<Self> {
        let n = base.first().map_or(0, |l| l.len());
        if n == 0 || base.len() != haar.len() || base.iter().chain(&haar).any(|l| l.len() != n) {
            return invalid("base and Haar layers must share a shape");
        }
        let haar = haar.into_iter().map(|l| l.into_iter().map(reduce_generator).collect()).collect();
        Ok(TruncatedGateSchedule { n, base, haar, k_trunc })
    }

    /// Random instance `C` and Haar draws from one seed.
    pub fn random(n: usize, depth: usize, k_trunc: usize, seed: u64) -> Result<Self> {
        if n == 0 || depth == 0 {
            return invalid("need n ≥ 1 and depth ≥ 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = (0..depth).map(|_| random_angles(&mut rng, n)).collect();
        let haar = (0..depth).map(|_| random_angles(&mut rng, n)).collect();
        Self::new(base, haar, k_trunc)
    }

    pub fn depth(&self) -> usize {
        self.base.len()
    }

    pub fn nominal_degree(&self) -> usize {
        2 * self.n * self.k_trunc * self.depth()
    }

    pub fn with_truncation(&self, k_trunc: usize) -> Self {
        TruncatedGateSchedule { k_trunc, ..self.clone() }
    }

    /// The worst-case circuit `C`.
    pub fn base_circuit(&self) -> EffectiveCircuit {
        EffectiveCircuit { n: self.n, layers: self.base.clone(), readout: None }
    }

    pub fn max_generator(&self) -> f64 {
        self.haar.iter().flatten().fold(0.0, |a, r| a.max(r.abs()))
    }
}

/// Diagonal of `e^{irZ}·Σ_{k≤K}(−iθrZ)^k/k!` as `[⟨0|·|0⟩, ⟨1|·|1⟩]`.
pub fn truncated_diag(r: f64, theta: f64, k_trunc: usize) -> [C64; 2] {
    let entry = |s: f64| {
        let z = C64::new(0.0, -theta * r * s);
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..=k_trunc {
            term = term * z / k as f64;
            sum += term;
        }
        C64::from_polar(1.0, r * s) * sum
    };
    [entry(1.0), entry(-1.0)]
}

/// The truncated gate as a 2×2 matrix.
pub fn truncated_gate(r: f64, theta: f64, k_trunc: usize) -> [[C64; 2]; 2] {
    let d = truncated_diag(r, theta, k_trunc);
    let zero = C64::new(0.0, 0.0);
    [[d[0], zero], [zero, d[1]]]
}

/// Untruncated interpolation `e^{i(1−θ)rZ}`.
pub fn exact_diag(r: f64, theta: f64) -> [C64; 2] {
    [C64::from_polar(1.0, (1.0 - theta) * r), C64::from_polar(1.0, -(1.0 - theta) * r)]
}

/// `‖G†G − 1‖` for a diagonal gate.
pub fn unitarity_defect(d: &[C64; 2]) -> f64 {
    d.iter().map(|c| (c.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
}

fn run_schedule(s: &TruncatedGateSchedule, theta: f64, k_trunc: Option<usize>) -> Result<StateVector> {
    if s.n > sim::MAX_QUBITS {
        return Err(Error::Budget(format!("{} qubits exceeds the simulator limit", s.n)));
    }
    let mut st = StateVector::plus(s.n);
    for (alphas, rs) in s.base.iter().zip(&s.haar) {
        for (q, (&a, &r)) in alphas.iter().zip(rs).enumerate() {
            let g = match k_trunc {
                Some(k) => truncated_diag(r, theta, k),
                None => exact_diag(r, theta),
            };
            st.apply_diag(q, C64::from_polar(1.0, a) * g[0], C64::from_polar(1.0, -a) * g[1]);
        }
        st.apply_entangler();
    }
    Ok(st)
}

/// `|⟨x|C′(θ)|+^n⟩|²` with the schedule's truncation order.
pub fn output_probability(s: &TruncatedGateSchedule, theta: f64, x: usize) -> Result<f64> {
    if x >= 1 << s.n {
        return invalid("bitstring out of range");
    }
    Ok(run_schedule(s, theta, Some(s.k_trunc))?.amps[x].norm_sqr())
}

/// `q(θ) = p_0(C′(θ))`.
pub fn p0_oracle(s: &TruncatedGateSchedule, theta: f64) -> Result<f64> {
    output_probability(s, theta, 0)
}

/// `p_0` along the untruncated interpolation.
pub fn p0_exact(s: &TruncatedGateSchedule, theta: f64) -> Result<f64> {
    Ok(run_schedule(s, theta, None)?.amps[0].norm_sqr())
}

/// `p_0(C)` from the plain circuit simulator.
pub fn p0_direct(s: &TruncatedGateSchedule) -> Result<f64> {
    let st = sim::run_effective(&s.base_circuit(), &StateVector::plus(s.n))?;
    Ok(st.amps[0].norm_sqr())
}

/// Shifts the last layer of `C` by `π/2` where `y` is set, so that
/// `p_y(C′(θ))` equals `p_0` of the hidden schedule.
pub fn hide_schedule(s: &TruncatedGateSchedule, y: &[bool]) -> Result<TruncatedGateSchedule> {
    if y.len() != s.n {
        return invalid("outcome length must equal n");
    }
    let mut out = s.clone();
    if let Some(last) = out.base.last_mut() {
        for (a, &bit) in last.iter_mut().zip(y) {
            if bit {
                *a = wrap_angle(*a + FRAC_PI_2);
            }
        }
    }
    Ok(out)
}

/// Chebyshev nodes of the first kind on `[0, θ_max]`, ascending.
pub fn chebyshev_nodes(k: usize, theta_max: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k)
        .map(|j| 0.5 * theta_max * (1.0 - ((2 * j + 1) as f64 * PI / (2 * k) as f64).cos()))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaNodes {
    Chebyshev,
    Equispaced,
}

pub fn theta_nodes(kind: ThetaNodes, k: usize, theta_max: f64) -> Vec<f64> {
    match kind {
        ThetaNodes::Chebyshev => chebyshev_nodes(k, theta_max),
        ThetaNodes::Equispaced if k == 1 => vec![0.0],
        ThetaNodes::Equispaced => (0..k).map(|j| theta_max * j as f64 / (k - 1) as f64).collect(),
    }
}

/// Barycentric interpolation through distinct nodes.
pub fn barycentric(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let k = nodes.len();
    let w: Vec<f64> = (0..k)
        .map(|j| {
            let p: f64 = (0..k).filter(|&i| i != j).map(|i| nodes[j] - nodes[i]).product();
            1.0 / p
        })
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..k {
        let d = x - nodes[j];
        if d == 0.0 {
            return values[j];
        }
        num += w[j] / d * values[j];
        den += w[j] / d;
    }
    num / den
}

/// Polynomial in the Chebyshev basis of an interval `[0, θ_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPoly {
    pub theta_max: f64,
    pub coeffs: Vec<f64>,
}

impl ChebyshevPoly {
    fn map(&self, theta: f64) -> f64 {
        2.0 * theta / self.theta_max - 1.0
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let t = self.map(theta);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Least-squares fit of the given degree.
    pub fn fit(nodes: &[f64], values: &[f64], degree: usize, theta_max: f64) -> Result<Self> {
        let k = nodes.len();
        if k < degree + 1 {
            return invalid("too few points for the requested degree");
        }
        let mut a = DMatrix::<f64>::zeros(k, degree + 1);
        for (i, &th) in nodes.iter().enumerate() {
            for (j, v) in chebyshev_row(2.0 * th / theta_max - 1.0, degree + 1).into_iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        let b = DVector::from_column_slice(values);
        let c = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(ChebyshevPoly { theta_max, coeffs: c.iter().copied().collect() })
    }

    /// Coefficients in the monomial basis of `θ`.
    pub fn to_monomial(&self) -> Vec<f64> {
        let d = self.coeffs.len();
        // T_j(t) in monomials of t, then t = (2/θ_max)θ − 1
        let mut tm: Vec<Vec<f64>> = Vec::with_capacity(d);
        for j in 0..d {
            let p = match j {
                0 => vec![1.0],
                1 => vec![0.0, 1.0],
                _ => {
                    let mut p = vec![0.0; j + 1];
                    for (i, &c) in tm[j - 1].iter().enumerate() {
                        p[i + 1] += 2.0 * c;
                    }
                    for (i, &c) in tm[j - 2].iter().enumerate() {
                        p[i] -= c;
                    }
                    p
                }
            };
            tm.push(p);
        }
        let mut in_t = vec![0.0; d];
        for (j, p) in tm.iter().enumerate() {
            for (i, &c) in p.iter().enumerate() {
                in_t[i] += self.coeffs[j] * c;
            }
        }
        let (a, b) = (2.0 / self.theta_max, -1.0);
        let mut out = vec![0.0; d];
        let mut pow = vec![1.0];
        for &c in &in_t {
            for (i, &pc) in pow.iter().enumerate() {
                out[i] += c * pc;
            }
            let mut next = vec![0.0; pow.len() + 1];
            for (i, &pc) in pow.iter().enumerate() {
                next[i] += b * pc;
                next[i + 1] += a * pc;
            }
            pow = next;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    /// Samples in `[0, θ_max]` with `θ_max ≪ 1`, then extrapolation to `θ = 1`.
    Faithful { theta_max: f64 },
    /// Samples spread over `[0, 1]`.
    Demonstration,
}

impl Mode {
    pub fn theta_max(&self) -> f64 {
        match self {
            Mode::Faithful { theta_max } => *theta_max,
            Mode::Demonstration => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Faithful { .. } => "faithful",
            Mode::Demonstration => "demonstration",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub k_points: usize,
    pub corruption: f64,
    pub mode: Mode,
    pub nodes: ThetaNodes,
    pub decoder: FloatDecoder,
    pub seed: u64,
    /// Residual on retained points above which recovery is reported as failed.
    pub tolerance: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            k_points: 40,
            corruption: 0.2,
            mode: Mode::Demonstration,
            nodes: ThetaNodes::Chebyshev,
            decoder: FloatDecoder::Locator,
            seed: 1,
            tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredPolynomial {
    pub chebyshev: ChebyshevPoly,
    pub degree_bound: usize,
    pub nominal_degree: usize,
    pub sample_points: Vec<f64>,
    pub corrupted_indices: Vec<usize>,
    pub detected_errors: Vec<usize>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldTrackReport {
    pub prime: u64,
    pub scale_bits: u32,
    pub degree: usize,
    pub points: usize,
    pub corrupted_indices: Vec<usize>,
    pub detected_errors: Vec<usize>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub n: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    #[serde(rename = "K")]
    pub k_trunc: usize,
    pub k_points: usize,
    pub corruption: f64,
    pub mode: String,
    pub theta_max: f64,
    pub recovered_value: f64,
    /// `p_0(C′(1))` by direct simulation of the truncated circuit.
    pub direct_value: f64,
    /// `p_0(C)` of the untruncated instance.
    pub untruncated_value: f64,
    pub abs_error: f64,
    pub extrapolation_error: f64,
    pub truncation_error: f64,
    pub detected_errors: Vec<usize>,
    pub corrupted_indices: Vec<usize>,
    pub fit_degree: usize,
    pub nominal_degree: usize,
    pub residual: f64,
    pub within_decoding_guarantee: bool,
    pub status: String,
    pub field_track: Option<FieldTrackReport>,
    pub polynomial: RecoveredPolynomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloatDecoder {
    /// Error locator from the real Berlekamp–Welch system, then a least-squares refit.
    Locator,
    /// Least squares, discarding the worst point `⌊ck⌋` times.
    Greedy,
}

fn chebyshev_row(t: f64, len: usize) -> Vec<f64> {
    let mut row = vec![0.0; len];
    if len > 0 {
        row[0] = 1.0;
    }
    if len > 1 {
        row[1] = t;
    }
    for j in 2..len {
        row[j] = 2.0 * t * row[j - 1] - row[j - 2];
    }
    row
}

/// Indices of the `errors` points where the real error locator `E` is smallest.
///
/// Solves `E(θ_i)·y_i = Q(θ_i)` with `deg E ≤ errors`, `deg Q ≤ degree + errors`
/// in the Chebyshev basis, taking the right singular vector of least singular value.
pub fn error_locator(nodes: &[f64], values: &[f64], degree: usize, errors: usize, theta_max: f64) -> Result<Vec<usize>> {
    let k = nodes.len();
    if errors == 0 {
        return Ok(Vec::new());
    }
    if k < degree + 2 * errors + 1 {
        return invalid("too few points to locate that many errors");
    }
    let ne = errors + 1;
    let nq = degree + errors + 1;
    let cols = ne + nq;
    let mut m = DMatrix::<f64>::zeros(k.max(cols), cols);
    for (i, (&th, &y)) in nodes.iter().zip(values).enumerate() {
        let row = chebyshev_row(2.0 * th / theta_max - 1.0, nq.max(ne));
        for j in 0..ne {
            m[(i, j)] = y * row[j];
        }
        for j in 0..nq {
            m[(i, ne + j)] = -row[j];
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let imin = (0..svd.singular_values.len())
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .expect("nonempty");
    let mut mags: Vec<(usize, f64)> = nodes
        .iter()
        .enumerate()
        .map(|(i, &th)| {
            let row = chebyshev_row(2.0 * th / theta_max - 1.0, ne);
            (i, row.iter().enumerate().map(|(j, r)| vt[(imin, j)] * r).sum::<f64>().abs())
        })
        .collect();
    mags.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<usize> = mags[..errors].iter().map(|&(i, _)| i).collect();
    out.sort_unstable();
    Ok(out)
}

/// Least-squares fit after removing the listed points.
pub fn fit_excluding(
    nodes: &[f64],
    values: &[f64],
    degree: usize,
    theta_max: f64,
    excluded: &[usize],
) -> Result<(ChebyshevPoly, f64)> {
    let keep: Vec<usize> = (0..nodes.len()).filter(|i| !excluded.contains(i)).collect();
    let xs: Vec<f64> = keep.iter().map(|&i| nodes[i]).collect();
    let ys: Vec<f64> = keep.iter().map(|&i| values[i]).collect();
    let fit = ChebyshevPoly::fit(&xs, &ys, degree, theta_max)?;
    let res = keep.iter().map(|&i| (fit.eval(nodes[i]) - values[i]).abs()).fold(0.0, f64::max);
    Ok((fit, res))
}

/// Least squares with iterative removal of the worst raw residual, `drops` times.
/// The returned residual is the largest residual on the retained points.
pub fn robust_fit(
    nodes: &[f64],
    values: &[f64],
    degree: usize,
    theta_max: f64,
    drops: usize,
) -> Result<(ChebyshevPoly, Vec<usize>, f64)> {
    let mut active: Vec<usize> = (0..nodes.len()).collect();
    let mut removed = Vec::new();
    loop {
        let xs: Vec<f64> = active.iter().map(|&i| nodes[i]).collect();
        let ys: Vec<f64> = active.iter().map(|&i| values[i]).collect();
        let fit = ChebyshevPoly::fit(&xs, &ys, degree, theta_max)?;
        let res: Vec<f64> = active.iter().map(|&i| (fit.eval(nodes[i]) - values[i]).abs()).collect();
        let (worst, &wres) = res.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        if removed.len() == drops {
            removed.sort_unstable();
            return Ok((fit, removed, wres));
        }
        removed.push(active.remove(worst));
    }
}

/// Integerizes `coeffs·2^bits`, evaluates at `x = 1..k` over `F_p`, corrupts
/// the listed positions and decodes.
pub fn field_track(coeffs: &[f64], scale_bits: u32, k: usize, corrupt: &[usize], seed: u64) -> Result<FieldTrackReport> {
    let f = Field::p61();
    let scale = 2f64.powi(scale_bits as i32);
    let ints: Vec<u64> = coeffs
        .iter()
        .map(|c| {
            let v = (c * scale).round();
            if !(v.abs() < 2f64.powi(60)) {
                return Err(Error::InvalidArgument("coefficient too large to integerize".into()));
            }
            Ok(f.from_i128(v as i128))
        })
        .collect::<Result<_>>()?;
    if corrupt.iter().any(|&i| i >= k) {
        return invalid("corrupted index out of range");
    }
    let q = FieldPoly::new(ints);
    let d = coeffs.len().saturating_sub(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf1e1d);
    let mut pts: Vec<(u64, u64)> = (1..=k as u64).map(|x| (x, q.eval(&f, x))).collect();
    for &i in corrupt {
        let off = 1 + rng.random_range(0..f.p - 1);
        pts[i].1 = f.add(pts[i].1, off);
    }
    let decoded = field::berlekamp_welch(&f, &pts, d);
    let (detected, exact) = match decoded {
        Ok(dec) => (dec.error_positions.clone(), dec.poly == q),
        Err(_) => (Vec::new(), false),
    };
    Ok(FieldTrackReport {
        prime: f.p,
        scale_bits,
        degree: d,
        points: k,
        corrupted_indices: corrupt.to_vec(),
        detected_errors: detected,
        exact,
    })
}

/// Field track on a synthetic polynomial with real coefficients in `[−1, 1]`.
pub fn synthetic_field_track(degree: usize, k: usize, corrupt: &[usize], seed: u64) -> Result<FieldTrackReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..=1.0)).collect();
    field_track(&coeffs, 20, k, corrupt, seed)
}

/// Queries `q(θ)` at `k` nodes, corrupts `⌊ck⌋` of them, recovers the
/// polynomial and evaluates it at `θ = 1`.
pub fn recover_and_extrapolate(s: &TruncatedGateSchedule, cfg: &RecoveryConfig) -> Result<ReductionReport> {
    let k = cfg.k_points;
    if !(0.0..1.0).contains(&cfg.corruption) {
        return invalid("corruption fraction must lie in [0, 1)");
    }
    let theta_max = cfg.mode.theta_max();
    if !(theta_max > 0.0 && theta_max <= 1.0) {
        return invalid("theta_max must lie in (0, 1]");
    }
    let ncor = (cfg.corruption * k as f64).floor() as usize;
    let nominal = s.nominal_degree();
    if k < 2 * ncor + 1 {
        return invalid("too many corrupted points for any polynomial fit");
    }
    let degree = nominal.min(k - 2 * ncor - 1);
    let nodes = theta_nodes(cfg.nodes, k, theta_max);
    let clean: Vec<f64> = exec::map_indexed(k, |i| p0_oracle(s, nodes[i])).into_iter().collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut corrupted: Vec<usize> = sample(&mut rng, k, ncor).into_vec();
    corrupted.sort_unstable();
    let scale = clean.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
    let mut values = clean.clone();
    for &i in &corrupted {
        let mag = scale * (0.1 + 0.9 * rng.random::<f64>());
        values[i] += if rng.random::<bool>() { mag } else { -mag };
    }
    let (poly, detected, residual) = match cfg.decoder {
        FloatDecoder::Locator => {
            let detected = error_locator(&nodes, &values, degree, ncor, theta_max)?;
            let (poly, residual) = fit_excluding(&nodes, &values, degree, theta_max, &detected)?;
            (poly, detected, residual)
        }
        FloatDecoder::Greedy => robust_fit(&nodes, &values, degree, theta_max, ncor)?,
    };
    let recovered = poly.eval(1.0);
    let direct = p0_oracle(s, 1.0)?;
    let untruncated = p0_direct(s)?;
    let field = synthetic_field_track(degree, k, &corrupted, cfg.seed).ok();
    let ok = residual <= cfg.tolerance;
    Ok(ReductionReport {
        n: s.n,
        depth: s.depth(),
        k_trunc: s.k_trunc,
        k_points: k,
        corruption: cfg.corruption,
        mode: cfg.mode.name().to_string(),
        theta_max,
        recovered_value: recovered,
        direct_value: direct,
        untruncated_value: untruncated,
        abs_error: (recovered - direct).abs(),
        extrapolation_error: (recovered - direct).abs(),
        truncation_error: (direct - untruncated).abs(),
        detected_errors: detected.clone(),
        corrupted_indices: corrupted.clone(),
        fit_degree: degree,
        nominal_degree: nominal,
        residual,
        within_decoding_guarantee: cfg.corruption < 0.25,
        status: if ok { "ok".into() } else { "residual_above_tolerance".into() },
        field_track: field,
        polynomial: RecoveredPolynomial {
            chebyshev: poly,
            degree_bound: degree,
            nominal_degree: nominal,
            sample_points: nodes,
            corrupted_indices: corrupted,
            detected_errors: detected,
            residual,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "K")]
    pub k_trunc: usize,
    pub error: f64,
}

/// `|p_0(C′_K(θ)) − p_0(C′_∞(θ))|` for each `K`; at `θ = 1` the reference is `p_0(C)`.
pub fn truncation_error_sweep(s: &TruncatedGateSchedule, ks: &[usize], theta: f64) -> Result<Vec<SweepRow>> {
    let reference = p0_exact(s, theta)?;
    ks.iter()
        .map(|&k| Ok(SweepRow { k_trunc: k, error: (p0_oracle(&s.with_truncation(k), theta)? - reference).abs() }))
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("K,error\n");
    for r in rows {
        s.push_str(&format!("{},{:.6e}\n", r.k_trunc, r.error));
    }
    s
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_branch() {
        for a in [0.0, 1.0, 2.0, 3.5, 5.0, 6.2, -1.7] {
            let r = reduce_generator(a);
            assert!(r > -FRAC_PI_2 - 1e-15 && r <= FRAC_PI_2 + 1e-15);
            // same gate up to a global sign
            let d = ((a - r) / PI).round();
            assert!((a - r - d * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_eval_and_monomial() {
        let p = ChebyshevPoly { theta_max: 1.0, coeffs: vec![0.5, -0.25, 0.125, 0.3] };
        let m = p.to_monomial();
        for th in [0.0f64, 0.3, 1.0, 1.7] {
            let mono: f64 = m.iter().enumerate().map(|(i, c)| c * th.powi(i as i32)).sum();
            assert!((mono - p.eval(th)).abs() < 1e-12);
        }
    }

    #[test]
    fn nodes_inside_interval() {
        let v = chebyshev_nodes(10, 0.05);
        assert!(v.iter().all(|&t| t > 0.0 && t < 0.05));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
