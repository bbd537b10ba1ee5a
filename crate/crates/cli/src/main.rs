//! `aasg-uq`: adaptive ANOVA stochastic Galerkin experiments from the
//! command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 solver failure, 4 catalog budget exceeded, 5 mismatched inputs.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use aasg_core::io::write_json;
use aasg_core::par;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;

const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "aasg-uq", version, about = "Adaptive ANOVA stochastic Galerkin solver for random diffusion problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Adaptive ANOVA stochastic Galerkin run.
    Aasg(RunArgs),
    /// Stochastic Galerkin on the full total-degree space.
    Sgm(RunArgs),
    /// Monte Carlo baseline.
    Mc(RunArgs),
    /// Mean / variance errors of finished runs against a reference run.
    Compare(CompareArgs),
    /// Karhunen–Loève eigenvalue tables.
    KlReport(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `mc.threads` (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Finished run directory to measure E_err / V_err against.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Run directories to evaluate; repeat for a cost/error series.
    #[arg(long, required = true)]
    approx: Vec<PathBuf>,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    format_version: u32,
    version: String,
    command: &'a str,
    /// Seconds since the Unix epoch.
    started: f64,
    finished: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a Config>,
    outputs: Vec<String>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))
}

fn load_config(args: &RunArgs) -> Result<Config, CliError> {
    let mut cfg = Config::load(&args.config)?;
    if args.seed.is_some() || args.threads.is_some() {
        if let Some(mc) = cfg.mc.as_mut() {
            if let Some(s) = args.seed {
                mc.seed = s;
            }
            if let Some(t) = args.threads {
                mc.threads = t;
            }
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = unix_now();
    let (name, out, cfg, outputs) = match &cli.command {
        Command::Compare(a) => {
            prepare_out(&a.out)?;
            ("compare", a.out.clone(), None, commands::compare(&a.approx, &a.reference, &a.out)?)
        }
        Command::Aasg(a) | Command::Sgm(a) | Command::Mc(a) | Command::KlReport(a) => {
            let cfg = load_config(a)?;
            prepare_out(&a.out)?;
            let threads = a.threads.or(cfg.mc.as_ref().map(|m| m.threads)).unwrap_or(0);
            let reference = a.reference.as_deref();
            let (name, outputs) = par::with_threads(threads, || match &cli.command {
                Command::Aasg(_) => ("aasg", commands::aasg(&cfg, &a.out, reference)),
                Command::Sgm(_) => ("sgm", commands::sgm(&cfg, &a.out, reference)),
                Command::Mc(_) => ("mc", commands::mc(&cfg, &a.out, reference)),
                _ => ("kl-report", commands::kl_report(&cfg, &a.out)),
            });
            (name, a.out.clone(), Some(cfg), outputs?)
        }
    };
    let manifest = RunManifest {
        format_version: MANIFEST_FORMAT_VERSION,
        version: format!("aasg-uq {}", env!("CARGO_PKG_VERSION")),
        command: name,
        started,
        finished: unix_now(),
        config: cfg.as_ref(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
