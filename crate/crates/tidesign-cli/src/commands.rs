use std::collections::BTreeMap;
use std::fmt;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use tidesign::arch::{self, PhaseAssignment};
use tidesign::avgcase::{self, FloatDecoder, Mode, RecoveryConfig, ThetaNodes, TruncatedGateSchedule};
use tidesign::gap::{self, GapReport, Variant};
use tidesign::moments::{self, Encoding};
use tidesign::{anticonc, sim};

use crate::config::*;

/// Bad flag combination or value; exits with the usage code.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

pub const MBQC_TOL: f64 = 1e-10;
const COMPOSITION_SLACK: f64 = 1e-10;

#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
    /// `# key = value` lines placed above the CSV body.
    pub summary: Vec<(String, String)>,
    pub warnings: Vec<String>,
    /// Check that did not pass; the artifact is still written.
    pub failure: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn encoding(e: EncodingArg) -> Encoding {
    match e {
        EncodingArg::Sector => Encoding::Sector,
        EncodingArg::Full => Encoding::Full,
    }
}

fn parse_variants(s: &str) -> Result<Vec<Variant>> {
    if s.trim() == "all" {
        return Ok(Variant::ALL.to_vec());
    }
    s.split(',').map(|t| Variant::parse(t.trim()).map_err(|e| Usage(e.to_string()).into())).collect()
}

pub fn gap(cfg: &GapConfig) -> Result<Outcome> {
    let ns = parse_range(&cfg.n).map_err(|e| Usage(e.to_string()))?;
    let variants = parse_variants(&cfg.variant)?;
    let enc = encoding(cfg.encoding);
    let mut out = Outcome::default();
    let mut reports: Vec<GapReport> = Vec::new();
    for &n in &ns {
        for &v in &variants {
            let r = gap::compute_gap(enc, n, v, cfg.k)?;
            if r.degeneracy != v.ground_dim() {
                out.warnings.push(format!(
                    "{} n={n}: {} eigenvalues below {:e}, expected {}",
                    v.name(),
                    r.degeneracy,
                    r.threshold,
                    v.ground_dim()
                ));
            }
            reports.push(r);
        }
    }
    let nachtergaele = match cfg.nachtergaele_l {
        Some(l) => {
            let gamma = gap::compute_gap(Encoding::Sector, l + 1, Variant::Bulk, 4)?.gap;
            let table: BTreeMap<usize, f64> = [(l + 1, gamma)].into_iter().collect();
            let r = gap::nachtergaele_bound(&table, l, cfg.q_l)?;
            out.summary.push(("nachtergaele_bound".into(), format!("{:.6e}", r.bound)));
            Some(r)
        }
        None => None,
    };
    let bulk = if !variants.contains(&Variant::Bulk) && variants.contains(&Variant::BulkConjugated) {
        Variant::BulkConjugated
    } else {
        Variant::Bulk
    };
    out.csv = Some(gap::gap_table_csv(&reports, bulk));
    out.result = json!({ "reports": to_value(&reports), "nachtergaele": to_value(&nachtergaele) });
    Ok(out)
}

#[derive(Serialize)]
struct GRow {
    n: usize,
    k: usize,
    g: f64,
    residual: f64,
    iters: usize,
    composition_bound: f64,
    composition_holds: bool,
}

#[derive(Serialize)]
struct DesignReport {
    n: usize,
    eps: f64,
    gap_source: &'static str,
    gamma: Option<f64>,
    delta: f64,
    coefficient: f64,
    /// `m − 1`
    depth: u64,
    reference_coefficient: Option<f64>,
}

pub fn moments(cfg: &MomentsConfig) -> Result<Outcome> {
    let n = cfg.n;
    let do_g = cfg.g || (cfg.trace.is_none() && !cfg.design_depth);
    let sections = [do_g, cfg.trace.is_some(), cfg.design_depth].iter().filter(|&&b| b).count();
    if cfg.format == Format::Csv && sections > 1 {
        return usage("csv output holds one table: choose one of --g, --trace, --design-depth");
    }
    let mut out = Outcome::default();
    let mut result = serde_json::Map::new();

    if do_g {
        let ks = parse_range(&cfg.k).map_err(|e| Usage(e.to_string()))?;
        if ks.contains(&0) {
            return usage("k must be at least 1");
        }
        let g1 = moments::g_norm(n, 1, cfg.tol)?.g;
        let mut rows = Vec::new();
        for &k in &ks {
            let r = moments::g_norm(n, k, cfg.tol)?;
            let bound = g1.powi(k as i32);
            let holds = r.g <= bound + COMPOSITION_SLACK;
            if !holds {
                out.failure = Some(format!("composition inequality violated at k={k}"));
            }
            rows.push(GRow { n, k, g: r.g, residual: r.residual, iters: r.iters, composition_bound: bound, composition_holds: holds });
        }
        let mut csv = String::from("n,k,g,residual,iters,composition_bound\n");
        for r in &rows {
            csv.push_str(&format!("{},{},{:.12},{:.3e},{},{:.12}\n", r.n, r.k, r.g, r.residual, r.iters, r.composition_bound));
        }
        out.csv = Some(csv);
        result.insert("g".into(), to_value(&rows));
    }

    if let Some(kmax) = cfg.trace {
        let trace = moments::second_moment_trace(n, kmax, 0)?;
        let mut csv = String::from("k,moment,haar_target\n");
        for r in &trace {
            csv.push_str(&format!("{},{:.12e},{:.12e}\n", r.k, r.moment, r.haar_target));
        }
        out.csv = Some(csv);
        result.insert("trace".into(), to_value(&trace));
    }

    if cfg.design_depth {
        let (source, gamma, delta, reference) = match (cfg.gap, cfg.delta) {
            (Some(_), Some(_)) => return usage("give at most one of --gap and --delta"),
            (Some(g), None) => ("interval", Some(g), g / 32.0, ((g - 0.111).abs() < 5e-3).then_some(15700.0)),
            (None, Some(d)) => ("direct", None, d, ((d - 0.11).abs() < 5e-3).then_some(490.0)),
            (None, None) => ("measured", None, gap::compute_gap(Encoding::Sector, n, Variant::Full, 4)?.gap, None),
        };
        let d = DesignReport {
            n,
            eps: cfg.eps,
            gap_source: source,
            gamma,
            delta,
            coefficient: moments::design_coefficient(delta)?,
            depth: moments::design_depth(n, cfg.eps, delta)?,
            reference_coefficient: reference,
        };
        out.summary.push(("coefficient".into(), format!("{:.1}", d.coefficient)));
        if let Some(p) = reference {
            out.summary.push(("reference_coefficient".into(), format!("{p}")));
        }
        out.csv = Some(format!(
            "n,eps,delta,coefficient,depth\n{},{},{:.9},{:.3},{}\n",
            d.n, d.eps, d.delta, d.coefficient, d.depth
        ));
        result.insert("design".into(), to_value(&d));
    }
    out.result = Value::Object(result);
    Ok(out)
}

fn parse_bits(s: &str, len: usize) -> Result<Vec<bool>> {
    if s.len() != len || !s.chars().all(|c| c == '0' || c == '1') {
        return usage(format!("--hide needs a bitstring of length {len}"));
    }
    Ok(s.chars().map(|c| c == '1').collect())
}

pub fn simulate(cfg: &SimulateConfig) -> Result<Outcome> {
    let mut phases = match &cfg.phases {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            PhaseAssignment::from_json(&text)?
        }
        None => {
            let (n, m) = parse_lattice(&cfg.lattice).map_err(|e| Usage(e.to_string()))?;
            PhaseAssignment::random_physical(n, m, cfg.seed)?
        }
    };
    let lattice = arch::build_lattice(phases.n, phases.m)?;
    if let Some(y) = &cfg.hide {
        phases = arch::hide_outcome(&phases, &parse_bits(y, lattice.num_vertices())?)?;
    }
    let table = sim::run_physical(&lattice, &arch::ising_spec(&lattice), &phases)?;
    let mut out = Outcome::default();
    let mbqc = if cfg.check_mbqc {
        let eff = sim::effective_lattice_distribution(&lattice, &arch::to_effective_circuit(&lattice, &phases)?)?;
        let dev = table.probs.iter().zip(&eff.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let pass = dev <= MBQC_TOL;
        out.summary.push(("mbqc_max_deviation".into(), format!("{dev:.3e}")));
        out.summary.push(("mbqc_pass".into(), pass.to_string()));
        if !pass {
            out.failure = Some(format!("physical and effective distributions differ by {dev:e}"));
        }
        Some(json!({ "max_deviation": dev, "tolerance": MBQC_TOL, "pass": pass }))
    } else {
        None
    };
    out.summary.push(("collision".into(), format!("{:.12e}", table.collision())));
    out.csv = Some(table.to_csv());
    out.result = json!({
        "n": phases.n,
        "m": phases.m,
        "seed": phases.seed,
        "beta": phases.beta,
        "collision": table.collision(),
        "probabilities": table.probs,
        "mbqc": mbqc,
    });
    Ok(out)
}

pub fn anticonc(cfg: &AnticoncConfig) -> Result<Outcome> {
    let n = cfg.n;
    let (depth, source) = match cfg.depth.trim() {
        "auto" => {
            // Δ(H_n) ≤ 3n, so this undershoots the design depth.
            let lower = moments::design_depth(n, 1.0, 3.0 * n as f64)? as usize;
            (lower.min(4 * n), "auto")
        }
        d => (d.parse().map_err(|_| Usage(format!("--depth must be auto or an integer, got {d:?}")))?, "explicit"),
    };
    let eps = match cfg.eps {
        Some(e) => e,
        None => moments::moment_epsilon(n, depth).context("exact second moment unavailable; pass --eps")?,
    };
    let report = anticonc::estimate(n, depth, cfg.samples, &cfg.alphas, eps, cfg.seed)?;
    let mut out = Outcome::default();
    if report.insufficient_samples {
        out.warnings.push(format!("fewer than {} samples; error bars are unreliable", anticonc::MIN_SAMPLES));
    }
    if report.any_violation() {
        out.warnings.push("a Paley-Zygmund bound is violated beyond 3 sigma".into());
    }
    out.summary.push(("D".into(), depth.to_string()));
    out.summary.push(("eps".into(), format!("{eps:.6e}")));
    out.summary.push(("collision".into(), format!("{:.9e}", report.collision)));
    out.summary.push(("collision_normalized".into(), format!("{:.9}", report.collision_normalized)));
    out.summary.push(("haar_collision".into(), format!("{:.9e}", report.haar_collision)));
    out.csv = Some(report.to_csv());
    out.result = json!({ "depth_source": source, "report": to_value(&report) });
    Ok(out)
}

pub fn reduce(cfg: &ReduceConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    if cfg.corrupt >= 0.25 {
        out.warnings.push(format!(
            "corruption {} is at or above 1/4, outside the unique-decoding guarantee",
            cfg.corrupt
        ));
    }
    let schedule = TruncatedGateSchedule::random(cfg.n, cfg.depth, cfg.k_trunc, cfg.seed)?;
    let rc = RecoveryConfig {
        k_points: cfg.points,
        corruption: cfg.corrupt,
        mode: match cfg.mode {
            ModeArg::Demonstration => Mode::Demonstration,
            ModeArg::Faithful => Mode::Faithful { theta_max: cfg.theta_max },
        },
        nodes: match cfg.nodes {
            NodesArg::Chebyshev => ThetaNodes::Chebyshev,
            NodesArg::Equispaced => ThetaNodes::Equispaced,
        },
        decoder: match cfg.decoder {
            DecoderArg::Locator => FloatDecoder::Locator,
            DecoderArg::Greedy => FloatDecoder::Greedy,
        },
        seed: cfg.seed,
        tolerance: cfg.tolerance,
    };
    let report = avgcase::recover_and_extrapolate(&schedule, &rc)?;
    if report.status != "ok" {
        out.warnings.push(format!("fit residual {:.3e} above tolerance {:e}", report.residual, cfg.tolerance));
    }
    let sweep = if cfg.sweep.is_empty() {
        None
    } else {
        Some(avgcase::truncation_error_sweep(&schedule, &cfg.sweep, 1.0)?)
    };
    match &sweep {
        Some(rows) => out.csv = Some(avgcase::sweep_csv(rows)),
        None if cfg.format == Format::Csv => return usage("csv output is the truncation sweep; give --sweep"),
        None => {}
    }
    out.summary.push(("abs_error".into(), format!("{:.3e}", report.abs_error)));
    out.summary.push(("recovered_value".into(), format!("{:.15e}", report.recovered_value)));
    out.summary.push(("direct_value".into(), format!("{:.15e}", report.direct_value)));
    out.result = json!({ "report": to_value(&report), "sweep": to_value(&sweep) });
    Ok(out)
}
