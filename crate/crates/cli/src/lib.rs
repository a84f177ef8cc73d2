//! Command-line front end for the `longbond` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::commands::Outcome;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "longbond",
    version,
    about = "Vasicek and Lévy-Vasicek pricing-kernel diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discount-bond prices and yields over a maturity grid, plus the long rate.
    Curve(CommonArgs),
    /// Long rate, uniform-integrability regime and Ross-recovery diagnostics.
    Regime(CommonArgs),
    /// Long-bond return `L_t` along a short-rate scenario file.
    Longbond(CommonArgs),
    /// Monte Carlo summary statistics on the simulation grid.
    Simulate(CommonArgs),
    /// Monte Carlo and exponent checks against the analytic results.
    Validate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `simulation.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'static str,
    config: &'a RunConfig,
    seed: Option<u64>,
    scheme: Option<&'static str>,
    version: &'static str,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Self::Curve(a)
            | Self::Regime(a)
            | Self::Longbond(a)
            | Self::Simulate(a)
            | Self::Validate(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Curve(_) => "curve",
            Self::Regime(_) => "regime",
            Self::Longbond(_) => "longbond",
            Self::Simulate(_) => "simulate",
            Self::Validate(_) => "validate",
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("longbond: one or more validation checks failed");
            1
        }
        Err(e) => {
            eprintln!("longbond: {e}");
            e.exit_code()
        }
    }
}

/// Runs the command and writes its output; `Ok(false)` when a validation check failed.
pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    let args = cli.command.args();
    let cfg = RunConfig::load(&args.config)?;
    let base_dir = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let outcome: Outcome = match &cli.command {
        Command::Curve(_) => commands::curve(&cfg)?,
        Command::Regime(_) => commands::regime(&cfg)?,
        Command::Longbond(_) => commands::longbond(&cfg, &base_dir)?,
        Command::Simulate(a) => commands::simulate(&cfg, a.seed)?,
        Command::Validate(a) => commands::validate(&cfg, a.seed)?,
    };
    outcome.table.check_finite()?;
    let text = match args.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => {
            let meta = Meta {
                command: cli.command.name(),
                config: &cfg,
                seed: outcome.seed,
                scheme: outcome.scheme.map(|s| s.as_str()),
                version: env!("CARGO_PKG_VERSION"),
            };
            outcome.table.to_json(&meta)
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(outcome.passed)
}
