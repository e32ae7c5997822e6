//! `homlab`: homogenization experiments for nonlocal operators with
//! oscillating coefficients.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::SolveTarget;
use crate::config::ExperimentConfig;
use crate::output::RunDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] homlab_core::Error),
    #[error("io: {0}")]
    Io(String),
}

pub enum Status {
    Ok,
    HypothesisFailed,
}

#[derive(Parser)]
#[command(name = "homlab", version, about = "Homogenization experiments for nonlocal operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Run directory; defaults to `output_dir` from the config, then `runs/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for random test vectors in diagnostics.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check the kernel hypotheses and write hypotheses.json.
    CheckKernel(Common),
    /// Effective coefficient and angular density table.
    Effective(Common),
    /// Solve one resolvent problem.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Scale of the oscillating operator.
        #[arg(long, conflicts_with = "effective", required_unless_present = "effective")]
        eps: Option<f64>,
        /// Solve the homogenized problem.
        #[arg(long)]
        effective: bool,
    },
    /// Convergence study over the configured eps list.
    Converge(Common),
    /// Region, cube, translation and exterior diagnostics.
    Diagnose(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Self::CheckKernel(c) | Self::Effective(c) | Self::Converge(c) | Self::Diagnose(c) => c,
            Self::Solve { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::CheckKernel(_) => "check-kernel",
            Self::Effective(_) => "effective",
            Self::Solve { .. } => "solve",
            Self::Converge(_) => "converge",
            Self::Diagnose(_) => "diagnose",
        }
    }
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let common = cli.command.common();
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let (cfg, text) = ExperimentConfig::load(&common.config)?;
    let root = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()));
    let dir = RunDir::create(root)?;
    dir.write_bytes("config.json", text.as_bytes())?;
    let status = match &cli.command {
        Command::CheckKernel(_) => commands::check_kernel(&cfg, &dir)?,
        Command::Effective(_) => commands::effective(&cfg, &dir)?,
        Command::Solve { eps, effective, .. } => {
            let target = match (eps, effective) {
                (Some(e), false) => SolveTarget::Eps(*e),
                _ => SolveTarget::Effective,
            };
            commands::solve(&cfg, &dir, target)?
        }
        Command::Converge(_) => commands::converge(&cfg, &dir)?,
        Command::Diagnose(c) => commands::diagnose(&cfg, &dir, c.seed)?,
    };
    println!("outputs in {}", dir.path().display());
    Ok(status)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::HypothesisFailed) => {
            eprintln!("one or more kernel hypotheses failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
