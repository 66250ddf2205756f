//! `sdisc`: stationary-disc analysis of model hypersurfaces from the command line.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numerical failures.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use config::{Command, RunConfig, Settings};

/// Input rejected before any computation.
#[derive(Debug)]
pub struct Validation(pub String);

/// Computation ran but did not produce a trustworthy answer.
#[derive(Debug)]
pub struct Numerical(pub String);

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Numerical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Validation {}
impl std::error::Error for Numerical {}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "sdisc", version, about = "Stationary discs, partial indices and jet bounds for model hypersurfaces")]
struct Cli {
    /// Subcommand; may instead come from `--config`.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Model polynomial (JSON).
    model: Option<PathBuf>,
    /// Truncation order N_F of the circle discretization [default: 256].
    #[arg(long)]
    nf: Option<usize>,
    /// Random directions tried when searching for an admissible v [default: 64].
    #[arg(long)]
    trials: Option<u64>,
    /// Seed of the direction sampler [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Admissibility margin, or the residual tolerance for attach/family.
    #[arg(long)]
    tol: Option<f64>,
    /// Report path; attach/family also write a CSV trace next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Kernel-coordinate grid: zero, axes:<delta> or file:<path>.
    #[arg(long)]
    grid: Option<String>,
    /// Perturbation theta (JSON) for attach/family.
    #[arg(long)]
    theta: Option<PathBuf>,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn into_parts(self) -> (RunConfig, Option<PathBuf>) {
        (
            RunConfig {
                command: self.command,
                model: self.model,
                theta: self.theta,
                nf: self.nf,
                trials: self.trials,
                seed: self.seed,
                tol: self.tol,
                grid: self.grid,
                out: self.out,
            },
            self.config,
        )
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Validation>() || cause.is::<serde_json::Error>() || cause.is::<std::io::Error>() {
            return EXIT_VALIDATION;
        }
        if cause.is::<Numerical>() {
            return EXIT_NUMERICAL;
        }
        if let Some(e) = cause.downcast_ref::<sdisc::Error>() {
            return if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL };
        }
    }
    EXIT_NUMERICAL
}

fn write_report(settings: &Settings, report: &commands::Report) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(&report.json)?;
    text.push('\n');
    match &settings.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
            if let Some(csv) = &report.csv {
                let csv_path = path.with_extension("csv");
                std::fs::write(&csv_path, csv).with_context(|| format!("cannot write {}", csv_path.display()))?;
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (flags, config) = cli.into_parts();
    let file = match config {
        Some(path) => RunConfig::load(&path)?,
        None => RunConfig::default(),
    };
    let settings = Settings::resolve(flags, file)?;
    let report = commands::run(&settings)?;
    write_report(&settings, &report)?;
    if let Some(failure) = report.failure {
        return Err(Numerical(failure).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
