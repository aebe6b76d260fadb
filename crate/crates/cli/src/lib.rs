//! Command-line runner for two-pulse Ramsey simulations: configuration,
//! orchestration of runs and sweeps, and plot-ready artifacts with
//! provenance manifests.

pub mod commands;
pub mod config;
pub mod formats;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ramsey_core::SimError;
use thiserror::Error;

pub use config::Overrides;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical divergence: {0}")]
    Divergence(String),
    #[error("sweep finished with failed points: {0}")]
    PartialSweep(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::PartialSweep(_) => 4,
            CliError::Validation(_) => 5,
            CliError::Io(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        if e.is_divergence() {
            return CliError::Divergence(e.to_string());
        }
        match e {
            SimError::Param(p) => CliError::Config(p.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ramsey", version, about = "Two-pulse Ramsey recoil simulations of a condensate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One two-pulse run: trajectory, state snapshots, spectra, recoil report.
    Run(OutArgs),
    /// Populations after the second pulse over a list of delays, plus fits.
    SweepDelay(OutArgs),
    /// First-pulse recoil shift and fringe frequency over a detuning grid.
    SweepDetuning(OutArgs),
    /// Envelope momentum spectra of a snapshot, or of the first-pulse state.
    Spectrum(SpectrumArgs),
    /// Fits a fringe CSV with a single cosine.
    Fit(FitArgs),
    /// Runs the fast invariant suite and reports each property.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Output directory (created if missing).
    #[arg(long, short, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: OutArgs,
    /// State snapshot written by `run`; defaults to a fresh first pulse.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: OutArgs,
    /// Fringe CSV written by `sweep-delay`.
    pub input: PathBuf,
    /// Population column to fit: s0, s2 or s_minus2.
    #[arg(long, default_value = "s0")]
    pub channel: String,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::SweepDelay(a) => commands::sweep_delay(&a),
        Command::SweepDetuning(a) => commands::sweep_detuning(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
