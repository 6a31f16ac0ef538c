use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod error;
mod output;

use commands::Command;
use config::{Loaded, Overrides};
use error::CliError;

/// Spectral and stochastic numerics for wave equations on self-similar measures.
#[derive(Debug, Parser)]
#[command(name = "cantorwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Validate the configuration and exit without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Overrides `numerics.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory. Overrides the config and `CANTORWAVE_OUT`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for path simulation.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    if cli.config.is_none() && cli.command != Command::Figures {
        return Err(CliError::Config(format!("{} needs --config", cli.command.name())));
    }
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
    };
    let cfg = Loaded::from_path(cli.config.as_deref(), &overrides)?;
    let written = commands::run(cli.command, &cfg, cli.dry_run)?;
    if cli.dry_run {
        println!("{}: configuration ok", cli.command.name());
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
