//! `extsource`: equilibrium, biorthogonal-system and kernel runs driven by
//! a JSON config, with CSV/JSON reports.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O.

mod cache;
mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Run;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "extsource", version, about = "Biorthogonal ensemble with an equi-spaced external source")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured working digits.
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// Report directory (default: config output_dir, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cache directory (default: config cache_dir, else <out>/cache).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve the equilibrium problem for every t in t_list.
    Equilibrium,
    /// Build the biorthogonal systems for every n in n_list.
    Biortho,
    /// Compare rescaled kernels with the sine or Airy kernel.
    Universality,
    /// Expansion identity residuals, coefficient limits and kernel splits.
    Diagnostics,
    /// Consistency checks on the equilibrium and the systems.
    Verify,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::Validation("--config is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(d) = cli.digits {
        cfg.digits = d;
    }
    let cfg = cfg.validate()?;
    if let Some(k) = cli.jobs {
        if k == 0 {
            return Err(CliError::Validation("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let out = commands::default_out(&cfg, cli.out.as_deref());
    let cache = cli.cache.or_else(|| cfg.raw.cache_dir.clone()).unwrap_or_else(|| out.join("cache"));
    let run = Run::new(cfg, out, cache)?;
    match cli.command {
        Command::Equilibrium => commands::equilibrium(&run),
        Command::Biortho => commands::biortho(&run),
        Command::Universality => commands::universality(&run),
        Command::Diagnostics => commands::diagnostics(&run),
        Command::Verify => commands::verify(&run),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
