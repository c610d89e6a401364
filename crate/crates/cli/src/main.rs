//! `mkv`: experiments on the mean-field double-well gradient flow.
//!
//! Every subcommand reads a strict JSON config, writes CSV/JSON artifacts
//! plus `manifest.json` into the output directory and prints a one-line JSON
//! status on stdout. Exit codes: 0 success, 1 assumption or computation
//! failure, 2 configuration error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use artifacts::Artifacts;
use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "mkv", version, about = "Mean-field double-well gradient-flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `out` in the config (default `mkv-out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "MKV_THREADS", default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Audit the structural assumptions on the potential.
    Check,
    /// Compute m* and the three stationary measures.
    Stationary,
    /// Tabulate the macroscopic Hamiltonian.
    Hbar,
    /// Integrate the flow from each configured initial condition.
    Flow,
    /// Classify the long-time limit of each configured initial condition.
    Classify,
    /// Classify a grid of Gaussian initial conditions and probe near the saddle.
    BasinSweep,
    /// Certify a basin radius around an anchor and test seeded perturbations.
    Certificate,
    /// Measure the particle-to-PDE gap as the ensemble grows.
    Particles,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Stationary => "stationary",
            Command::Hbar => "hbar",
            Command::Flow => "flow",
            Command::Classify => "classify",
            Command::BasinSweep => "basin-sweep",
            Command::Certificate => "certificate",
            Command::Particles => "particles",
        }
    }
}

fn run(cli: &Cli) -> CliResult<serde_json::Value> {
    if cli.threads == 0 {
        return Err(CliError::config("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;

    let command = cli.command.name();
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config is required"))?;
    let cfg = RunConfig::load(path)?;
    if let Some(exp) = &cfg.experiment {
        if exp != command {
            return Err(CliError::config(format!(
                "config is for `{exp}` but `{command}` was requested"
            )));
        }
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("mkv-out"));
    let mut out = Artifacts::create(&dir)?;

    let result = match cli.command {
        Command::Check => commands::check(&cfg, &mut out),
        Command::Stationary => commands::stationary(&cfg, &mut out),
        Command::Hbar => commands::hbar(&cfg, &mut out),
        Command::Flow => commands::flow(&cfg, &mut out),
        Command::Classify => commands::classify_cmd(&cfg, &mut out),
        Command::BasinSweep => commands::basin_sweep_cmd(&cfg, &mut out),
        Command::Certificate => commands::certificate(&cfg, &mut out),
        Command::Particles => commands::particles(&cfg, &mut out),
    };
    // a failed audit still leaves a complete, hashed report behind
    if matches!(result, Ok(()) | Err(CliError::Clauses(_))) {
        let dir = out.dir().to_path_buf();
        let files = out.finish(command, &cfg, cli.threads)?;
        result?;
        return Ok(json!({
            "status": "ok",
            "command": command,
            "out": dir,
            "files": files,
        }));
    }
    result.map(|_| serde_json::Value::Null)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => {
            println!("{status}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
