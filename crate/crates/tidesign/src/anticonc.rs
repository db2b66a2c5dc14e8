//! Monte Carlo anticoncentration statistics of random effective circuits.
//!
//! Each sample is a depth-`D` circuit `∏ E·e^{iβZ}` on `|+^n⟩` with uniform
//! angles; its output distribution is computed exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arch::EffectiveCircuit;
use crate::exec;
use crate::sim::{self, StateVector};
use crate::{invalid, Result};

pub const MAX_N: usize = 14;
pub const MIN_SAMPLES: usize = 1000;

pub fn default_alphas() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// `(1−α)²(1−ε)²/(2(1+ε))`.
pub fn paley_zygmund_bound(alpha: f64, eps: f64) -> f64 {
    (1.0 - alpha).powi(2) * (1.0 - eps).powi(2) / (2.0 * (1.0 + eps))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PorterThomasReference {
    pub n: usize,
    pub alphas: Vec<f64>,
    /// `Pr[N·p ≥ α] = e^{−α}`.
    pub fractions: Vec<f64>,
    /// Exact finite-`N` value `(1 − α/N)^{N−1}` for Haar states.
    pub finite_fractions: Vec<f64>,
    pub collision: f64,
}

pub fn porter_thomas_reference(n: usize, alphas: &[f64]) -> Result<PorterThomasReference> {
    if n == 0 || n > 62 {
        return invalid("n must lie in [1, 62]");
    }
    let nn = (1u64 << n) as f64;
    Ok(PorterThomasReference {
        n,
        alphas: alphas.to_vec(),
        fractions: alphas.iter().map(|a| (-a).exp()).collect(),
        finite_fractions: alphas.iter().map(|&a| (1.0 - a / nn).max(0.0).powf(nn - 1.0)).collect(),
        collision: 2.0 / (nn + 1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub alpha: f64,
    pub threshold: f64,
    /// Fraction of circuits with `p(0) ≥ threshold`.
    pub fraction: f64,
    pub stderr: f64,
    /// Fraction over all circuits and all outputs `x`.
    pub fraction_avg: f64,
    pub stderr_avg: f64,
    pub bound: f64,
    pub pt_reference: f64,
    /// Fixed-`x` fraction below the bound by more than three standard errors.
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnticoncentrationReport {
    pub n: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    #[serde(rename = "S")]
    pub samples: usize,
    pub seed: u64,
    pub eps: f64,
    pub rows: Vec<AlphaRow>,
    /// Mean of `Σ_x p(x)²`.
    pub collision: f64,
    pub collision_stderr: f64,
    /// `N·collision`, equal to one for a point mass after normalization by the uniform value.
    pub collision_normalized: f64,
    pub haar_collision: f64,
    pub max_normalization_error: f64,
    pub insufficient_samples: bool,
}

impl AnticoncentrationReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,D,alpha,fraction,stderr,bound,pt_reference\n");
        self.append_csv_rows(&mut s);
        s
    }

    fn append_csv_rows(&self, s: &mut String) {
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6},{:.6}\n",
                self.n, self.depth, r.alpha, r.fraction, r.stderr, r.bound, r.pt_reference
            ));
        }
    }

    pub fn any_violation(&self) -> bool {
        self.rows.iter().any(|r| r.violated)
    }
}

pub fn sweep_csv(reports: &[AnticoncentrationReport]) -> String {
    let mut s = String::from("n,D,alpha,fraction,stderr,bound,pt_reference\n");
    for r in reports {
        r.append_csv_rows(&mut s);
    }
    s
}

/// Output distribution of sample `index` of the run seeded by `seed`.
pub fn sample_distribution(n: usize, depth: usize, seed: u64, index: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let circuit = EffectiveCircuit::random(n, depth, &mut rng);
    let st = sim::run_effective(&circuit, &StateVector::plus(n))?;
    Ok(st.amps.iter().map(|a| a.norm_sqr()).collect())
}

struct SampleStats {
    p0: f64,
    counts: Vec<usize>,
    collision: f64,
    norm_err: f64,
}

fn binomial_stderr(f: f64, s: usize) -> f64 {
    (f * (1.0 - f) / s as f64).sqrt()
}

pub fn estimate(n: usize, depth: usize, samples: usize, alphas: &[f64], eps: f64, seed: u64) -> Result<AnticoncentrationReport> {
    if n == 0 || n > MAX_N {
        return invalid("n must lie in [1, 14]");
    }
    if samples == 0 {
        return invalid("at least one sample is required");
    }
    if !(0.0..1.0).contains(&eps) {
        return invalid("eps must lie in [0, 1)");
    }
    if alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return invalid("alphas must lie in [0, 1]");
    }
    let nn = (1usize << n) as f64;
    let thresholds: Vec<f64> = alphas.iter().map(|a| a * (1.0 - eps) / nn).collect();
    let stats: Vec<SampleStats> = exec::map_indexed(samples, |i| {
        let probs = sample_distribution(n, depth, seed, i as u64)?;
        let counts = thresholds.iter().map(|&t| probs.iter().filter(|&&p| p >= t).count()).collect();
        Ok(SampleStats {
            p0: probs[0],
            counts,
            collision: probs.iter().map(|p| p * p).sum(),
            norm_err: (probs.iter().sum::<f64>() - 1.0).abs(),
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let s = samples as f64;
    let pt = porter_thomas_reference(n, alphas)?;
    let rows = alphas
        .iter()
        .enumerate()
        .map(|(j, &alpha)| {
            let t = thresholds[j];
            let fraction = stats.iter().filter(|st| st.p0 >= t).count() as f64 / s;
            let total: usize = stats.iter().map(|st| st.counts[j]).sum();
            let fraction_avg = total as f64 / (s * nn);
            let stderr = binomial_stderr(fraction, samples);
            let bound = paley_zygmund_bound(alpha, eps);
            AlphaRow {
                alpha,
                threshold: t,
                fraction,
                stderr,
                fraction_avg,
                stderr_avg: binomial_stderr(fraction_avg, samples),
                bound,
                pt_reference: (-(alpha * (1.0 - eps))).exp(),
                violated: fraction + 3.0 * stderr.max(1.0 / s) < bound,
            }
        })
        .collect();
    let coll: Vec<f64> = stats.iter().map(|st| st.collision).collect();
    let mean = coll.iter().sum::<f64>() / s;
    let var = if samples > 1 { coll.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (s - 1.0) } else { 0.0 };
    Ok(AnticoncentrationReport {
        n,
        depth,
        samples,
        seed,
        eps,
        rows,
        collision: mean,
        collision_stderr: (var / s).sqrt(),
        collision_normalized: mean * nn,
        haar_collision: pt.collision,
        max_normalization_error: stats.iter().map(|st| st.norm_err).fold(0.0, f64::max),
        insufficient_samples: samples < MIN_SAMPLES,
    })
}

pub fn depth_sweep(n: usize, depths: &[usize], samples: usize, alphas: &[f64], eps: f64, seed: u64) -> Result<Vec<AnticoncentrationReport>> {
    depths.iter().map(|&d| estimate(n, d, samples, alphas, eps, seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values() {
        assert_eq!(paley_zygmund_bound(0.0, 0.0), 0.5);
        assert_eq!(paley_zygmund_bound(0.5, 0.0), 0.125);
    }

    #[test]
    fn reference_values() {
        let r = porter_thomas_reference(1, &[0.0]).unwrap();
        assert!((r.collision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.fractions[0], 1.0);
    }

    #[test]
    fn empty_circuit_is_uniform() {
        let r = estimate(3, 0, 4, &[0.5], 0.0, 1).unwrap();
        assert!((r.collision_normalized - 1.0).abs() < 1e-12);
        assert!(r.insufficient_samples);
    }
}
