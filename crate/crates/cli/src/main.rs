use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracdim_cli::{execute, run::init_threads, CliError, RunConfig};

/// Dimension profiles of compact sets under Levy-process kernels.
///
/// Every flag can also be given in a JSON config file; flags win.
#[derive(Parser)]
#[command(name = "fracdim", version)]
struct Cli {
    /// Flat JSON config record
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write the merged config here and continue
    #[arg(long)]
    save_config: Option<PathBuf>,

    #[command(flatten)]
    flags: RunConfig,
}

fn main_inner() -> Result<(), CliError> {
    let cli = Cli::parse();
    init_threads(std::env::var("FRACDIM_THREADS").ok())?;
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?.overlay(cli.flags),
        None => cli.flags,
    };
    if let Some(path) = &cli.save_config {
        std::fs::write(path, cfg.to_json()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    execute(&cfg)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
