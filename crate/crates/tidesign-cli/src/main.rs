//! `tidesign`: gaps, moments, simulation, anticoncentration and the reduction demo.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tidesign::report::Envelope;

use commands::{Outcome, Usage};
use config::*;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "tidesign", version, about = "Translation-invariant Ising architecture workbench")]
struct Cli {
    /// TOML file with one table per subcommand; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the data-parallel kernels.
    #[arg(long, global = true, env = "TIDESIGN_THREADS")]
    threads: Option<usize>,
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    serial: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenvalues and spectral gaps of the moment Hamiltonians.
    Gap {
        /// Chain lengths: `3`, `3..5` (inclusive) or `3,5`.
        #[arg(long)]
        n: Option<String>,
        /// full, leftopen, bulk, bulkconjugated, a comma list, or all.
        #[arg(long)]
        variant: Option<String>,
        /// Number of eigenvalues to report.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        encoding: Option<EncodingArg>,
        #[arg(long)]
        nachtergaele_l: Option<usize>,
        #[arg(long)]
        q_l: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tensor-product-expander norms, second-moment traces and design depths.
    Moments {
        #[arg(long)]
        n: Option<usize>,
        /// Compute g(v^{*k}, 2) for each k.
        #[arg(long)]
        g: bool,
        #[arg(long)]
        k: Option<String>,
        /// Exact E|<0|U|+>|^4 for 0..=KMAX grouped layers.
        #[arg(long, value_name = "KMAX")]
        trace: Option<usize>,
        #[arg(long)]
        design_depth: bool,
        #[arg(long)]
        eps: Option<f64>,
        /// Interval gap; the depth uses the bound gap/32.
        #[arg(long)]
        gap: Option<f64>,
        /// Spectral gap used as is.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Output distribution of the constant-time lattice evolution.
    Simulate {
        /// `NxM`: rows by columns.
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        check_mbqc: bool,
        /// Phase fixture in JSON.
        #[arg(long)]
        phases: Option<String>,
        /// Outcome to relabel to all zeros.
        #[arg(long)]
        hide: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo anticoncentration estimates with Paley-Zygmund bounds.
    Anticonc {
        #[arg(long)]
        n: Option<usize>,
        /// `auto` or a number of layers.
        #[arg(long)]
        depth: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Second-moment excess; exact value when omitted.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Polynomial recovery from corrupted truncated-circuit probabilities.
    Reduce {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        /// Taylor truncation order.
        #[arg(long = "K")]
        k_trunc: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        /// Fraction of corrupted queries.
        #[arg(long)]
        corrupt: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        theta_max: Option<f64>,
        #[arg(long, value_enum)]
        nodes: Option<NodesArg>,
        #[arg(long, value_enum)]
        decoder: Option<DecoderArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Truncation orders for the K,error table; `none` disables it.
        #[arg(long)]
        sweep: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_output(format: &mut Format, output: &mut Option<String>, args: OutputArgs) {
    set(format, args.format);
    if args.output.is_some() {
        *output = args.output;
    }
}

struct Run {
    name: &'static str,
    config: serde_json::Value,
    format: Format,
    output: Option<String>,
    outcome: Outcome,
}

fn resolved<C: Serialize>(name: &'static str, cfg: &C, format: Format, output: &Option<String>, outcome: Outcome) -> Run {
    Run { name, config: serde_json::to_value(cfg).expect("configs serialize"), format, output: output.clone(), outcome }
}

fn run(cli: Cli) -> Result<Run> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    Ok(match cli.command {
        Command::Gap { n, variant, k, encoding, nachtergaele_l, q_l, out } => {
            let mut c: GapConfig = from_file(file.gap.as_ref())?;
            set(&mut c.n, n);
            set(&mut c.variant, variant);
            set(&mut c.k, k);
            set(&mut c.encoding, encoding);
            c.nachtergaele_l = nachtergaele_l.or(c.nachtergaele_l);
            c.q_l = q_l.or(c.q_l);
            set_output(&mut c.format, &mut c.output, out);
            resolved("gap", &c, c.format, &c.output, commands::gap(&c)?)
        }
        Command::Moments { n, g, k, trace, design_depth, eps, gap, delta, tol, out } => {
            let mut c: MomentsConfig = from_file(file.moments.as_ref())?;
            set(&mut c.n, n);
            c.g |= g;
            set(&mut c.k, k);
            c.trace = trace.or(c.trace);
            c.design_depth |= design_depth;
            set(&mut c.eps, eps);
            c.gap = gap.or(c.gap);
            c.delta = delta.or(c.delta);
            set(&mut c.tol, tol);
            set_output(&mut c.format, &mut c.output, out);
            resolved("moments", &c, c.format, &c.output, commands::moments(&c)?)
        }
        Command::Simulate { lattice, seed, check_mbqc, phases, hide, out } => {
            let mut c: SimulateConfig = from_file(file.simulate.as_ref())?;
            set(&mut c.lattice, lattice);
            set(&mut c.seed, seed);
            c.check_mbqc |= check_mbqc;
            c.phases = phases.or(c.phases);
            c.hide = hide.or(c.hide);
            set_output(&mut c.format, &mut c.output, out);
            resolved("simulate", &c, c.format, &c.output, commands::simulate(&c)?)
        }
        Command::Anticonc { n, depth, samples, seed, eps, alphas, out } => {
            let mut c: AnticoncConfig = from_file(file.anticonc.as_ref())?;
            set(&mut c.n, n);
            set(&mut c.depth, depth);
            set(&mut c.samples, samples);
            set(&mut c.seed, seed);
            c.eps = eps.or(c.eps);
            set(&mut c.alphas, alphas);
            set_output(&mut c.format, &mut c.output, out);
            resolved("anticonc", &c, c.format, &c.output, commands::anticonc(&c)?)
        }
        Command::Reduce { n, depth, k_trunc, points, corrupt, mode, theta_max, nodes, decoder, seed, tolerance, sweep, out } => {
            let mut c: ReduceConfig = from_file(file.reduce.as_ref())?;
            set(&mut c.n, n);
            set(&mut c.depth, depth);
            set(&mut c.k_trunc, k_trunc);
            set(&mut c.points, points);
            set(&mut c.corrupt, corrupt);
            set(&mut c.mode, mode);
            set(&mut c.theta_max, theta_max);
            set(&mut c.nodes, nodes);
            set(&mut c.decoder, decoder);
            set(&mut c.seed, seed);
            set(&mut c.tolerance, tolerance);
            if let Some(s) = sweep {
                c.sweep = if s == "none" { Vec::new() } else { parse_range(&s).map_err(|e| Usage(e.to_string()))? };
            }
            set_output(&mut c.format, &mut c.output, out);
            resolved("reduce", &c, c.format, &c.output, commands::reduce(&c)?)
        }
    })
}

fn render(run: &Run) -> Result<String> {
    let envelope = Envelope::new(run.name, &run.config, &run.outcome.result);
    match (run.format, &run.outcome.csv) {
        (Format::Json, _) => Ok(envelope.to_json()? + "\n"),
        (Format::Csv, Some(body)) => {
            let mut s = format!("# schema_version = {}\n# command = {}\n", envelope.schema_version, run.name);
            s.push_str(&format!("# config = {}\n", serde_json::to_string(&run.config)?));
            for (k, v) in &run.outcome.summary {
                s.push_str(&format!("# {k} = {v}\n"));
            }
            s.push_str(body);
            Ok(s)
        }
        (Format::Csv, None) => Err(Usage(format!("{} has no csv output for this configuration", run.name)).into()),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<tidesign::Error>() {
        Some(tidesign::Error::InvalidArgument(_) | tidesign::Error::Budget(_)) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.serial {
        tidesign::exec::set_serial(true);
    }
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let result = run(cli).and_then(|r| {
        let text = render(&r)?;
        match &r.output {
            Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {path}"))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(r)
    });
    match result {
        Ok(r) => {
            for w in &r.outcome.warnings {
                eprintln!("warning: {w}");
            }
            match &r.outcome.failure {
                Some(f) => {
                    eprintln!("error: {f}");
                    ExitCode::from(EXIT_FAILURE)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}: {e:#}", if code == EXIT_USAGE { "usage error" } else { "error" });
            ExitCode::from(code)
        }
    }
}
