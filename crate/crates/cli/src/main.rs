//! `fpc`: calibrate first-passage credit models to CDS quotes, export
//! survival curves, price CDS books and equity return swaps with
//! counterparty risk.

mod commands;
mod inputs;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CalibrateArgs, ErsArgs, PriceCdsArgs, SurvivalArgs};

#[derive(Parser)]
#[command(name = "fpc", version, about = "First-passage structural credit models: calibration and pricing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate AT1P, SBAT1P or SVBAT1P to a CDS quote file.
    Calibrate(CalibrateArgs),
    /// Export survival probabilities (or the difference of two models) as CSV.
    Survival(SurvivalArgs),
    /// Value a CDS book at bid, mid and ask.
    PriceCds(PriceCdsArgs),
    /// Equity return swap with counterparty risk: price or fair spread.
    Ers(ErsArgs),
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or configuration (exit 1).
    Input(anyhow::Error),
    /// Numerical failure or non-convergence (exit 2).
    Numerical(anyhow::Error),
}

impl From<fpc_core::Error> for Failure {
    fn from(e: fpc_core::Error) -> Self {
        use fpc_core::Error as E;
        match e {
            E::Calibration { .. } | E::NoAdmissibleBarrier | E::NegativeProbability { .. } | E::Root(_) => Failure::Numerical(e.into()),
            _ => Failure::Input(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

/// What a command reports back besides its output files.
pub enum Outcome {
    Done,
    NotConverged,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("FPC_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("FPC_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("FPC_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Survival(a) => commands::survival(a),
        Command::PriceCds(a) => commands::price_cds(a),
        Command::Ers(a) => commands::ers(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("warning: optimizer did not converge; best point reported");
            ExitCode::from(2)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}
