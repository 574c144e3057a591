//! `reactlab`: dispersion, transient-growth, region-scan and simulation
//! front end.
//!
//! Exit status: 0 on success, 1 on i/o failure, 2 on configuration errors,
//! 3 on numerical failures and 64 for an unknown or missing subcommand.

mod commands;
mod config;
mod error;
mod output;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "reactlab",
    version,
    about = "Turing and transient instability analysis for chemotaxis systems"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Flat `key = value` file using the parameter field names.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override any config key, e.g. `--set k2=0.6`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Metabolic quotient.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Chemotactic sensitivity.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate h, h̃, eigenvalues and non-normality over a k² grid.
    Dispersion(commands::DispersionArgs),
    /// Amplification envelope of one wavenumber and its summary.
    Envelope(commands::EnvelopeArgs),
    /// Classify a (q, β) grid into instability regions.
    Scan(commands::ScanArgs),
    /// Integrate the reaction-diffusion-chemotaxis system.
    Simulate(commands::SimulateArgs),
    /// Classify a single (q, β) point.
    Classify,
}

/// Sizes the global worker pool from `REACTLAB_THREADS`.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("REACTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::config(
            "REACTLAB_THREADS",
            format!("expected a positive integer, got {raw:?}"),
        )
    })?;
    #[cfg(feature = "parallel")]
    {
        let available = std::thread::available_parallelism().map_or(1, |a| a.get());
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.min(available))
            .build_global()
            .map_err(|e| CliError::config("REACTLAB_THREADS", e))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 64,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("reactlab: {e}");
        return e.exit_code();
    }
    let argv: Vec<String> = std::env::args().collect();
    let ctx = commands::Context {
        common: cli.common,
        argv,
    };
    let result = match cli.command {
        Command::Dispersion(a) => commands::dispersion(&ctx, &a),
        Command::Envelope(a) => commands::envelope(&ctx, &a),
        Command::Scan(a) => commands::scan(&ctx, &a),
        Command::Simulate(a) => commands::simulate(&ctx, &a),
        Command::Classify => commands::classify(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("reactlab: {e}");
            e.exit_code()
        }
    }
}
