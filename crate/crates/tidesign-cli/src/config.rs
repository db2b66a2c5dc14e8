//! Resolved run configurations. Precedence: flags, then config file, then defaults.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EncodingArg {
    Sector,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Demonstration,
    Faithful,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NodesArg {
    Chebyshev,
    Equispaced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderArg {
    Locator,
    Greedy,
}

/// Parsed config file: one optional table per subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gap: Option<toml::Table>,
    pub moments: Option<toml::Table>,
    pub simulate: Option<toml::Table>,
    pub anticonc: Option<toml::Table>,
    pub reduce: Option<toml::Table>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Defaults overlaid with the file section, if any.
pub fn from_file<T: DeserializeOwned + Default>(section: Option<&toml::Table>) -> Result<T> {
    match section {
        Some(t) => t.clone().try_into().context("invalid config section"),
        None => Ok(T::default()),
    }
}

/// `"3..5"` (inclusive), `"3"` or `"3,5,6"`.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad range start in {s:?}"))?;
        let b: usize = b.trim().trim_start_matches('=').parse().with_context(|| format!("bad range end in {s:?}"))?;
        if a > b {
            bail!("empty range {s:?}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad integer {t:?}")))
        .collect()
}

/// `"NxM"`.
pub fn parse_lattice(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(['x', 'X']).with_context(|| format!("lattice must look like 3x3, got {s:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapConfig {
    pub n: String,
    pub variant: String,
    pub k: usize,
    pub encoding: EncodingArg,
    /// Interval length `l` for the martingale bound, computed from `Δ(H^B_{l+1})`.
    pub nachtergaele_l: Option<usize>,
    pub q_l: Option<usize>,
    pub format: Format,
    pub output: Option<String>,
}

impl Default for GapConfig {
    fn default() -> Self {
        GapConfig {
            n: "3..5".into(),
            variant: "bulk,full".into(),
            k: 4,
            encoding: EncodingArg::Sector,
            nachtergaele_l: None,
            q_l: None,
            format: Format::Csv,
            output: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub n: usize,
    pub g: bool,
    pub k: String,
    pub trace: Option<usize>,
    pub design_depth: bool,
    pub eps: f64,
    /// Interval gap `γ`; the design depth then uses `Δ ≥ γ/32`.
    pub gap: Option<f64>,
    /// Gap `Δ(H_n)` used directly.
    pub delta: Option<f64>,
    pub tol: f64,
    pub format: Format,
    pub output: Option<String>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig {
            n: 3,
            g: false,
            k: "1..4".into(),
            trace: None,
            design_depth: false,
            eps: 0.01,
            gap: None,
            delta: None,
            tol: 1e-10,
            format: Format::Json,
            output: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub lattice: String,
    pub seed: u64,
    pub check_mbqc: bool,
    /// JSON phase fixture; overrides `lattice` and `seed`.
    pub phases: Option<String>,
    /// Outcome `y` to relabel to all zeros, as a bitstring.
    pub hide: Option<String>,
    pub format: Format,
    pub output: Option<String>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            lattice: "3x3".into(),
            seed: 1,
            check_mbqc: false,
            phases: None,
            hide: None,
            format: Format::Csv,
            output: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnticoncConfig {
    pub n: usize,
    /// `"auto"` or a layer count.
    pub depth: String,
    pub samples: usize,
    pub seed: u64,
    /// Second-moment excess; computed exactly when absent.
    pub eps: Option<f64>,
    pub alphas: Vec<f64>,
    pub format: Format,
    pub output: Option<String>,
}

impl Default for AnticoncConfig {
    fn default() -> Self {
        AnticoncConfig {
            n: 6,
            depth: "auto".into(),
            samples: 5000,
            seed: 1,
            eps: None,
            alphas: tidesign::anticonc::default_alphas(),
            format: Format::Csv,
            output: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReduceConfig {
    pub n: usize,
    pub depth: usize,
    #[serde(rename = "K")]
    pub k_trunc: usize,
    pub points: usize,
    pub corrupt: f64,
    pub mode: ModeArg,
    pub theta_max: f64,
    pub nodes: NodesArg,
    pub decoder: DecoderArg,
    pub seed: u64,
    pub tolerance: f64,
    /// Truncation orders for the `K,error` sweep; empty disables it.
    pub sweep: Vec<usize>,
    pub format: Format,
    pub output: Option<String>,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            n: 2,
            depth: 2,
            k_trunc: 4,
            points: 40,
            corrupt: 0.2,
            mode: ModeArg::Demonstration,
            theta_max: 0.05,
            nodes: NodesArg::Chebyshev,
            decoder: DecoderArg::Locator,
            seed: 1,
            tolerance: 1e-8,
            sweep: (0..=14).collect(),
            format: Format::Json,
            output: None,
        }
    }
}
