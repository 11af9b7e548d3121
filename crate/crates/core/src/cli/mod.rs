//! Configuration-driven experiment runner behind the `rankone` binary.
//!
//! A run reads a TOML config, executes one of six experiments and writes
//! `results.csv`, `summary.csv` and `manifest.toml` into the output
//! directory. Exit status: 0 when every embedded check passes, 1 when a
//! check fails or replicas diverge, 2 for unusable input.

mod config;
mod experiments;
mod output;
mod plotdata;

use std::path::{Path, PathBuf};

pub use config::{CheckConfig, Experiment, ExperimentConfig, Overrides, SpectrumConfig, StepSize, Theta0Config};
pub use experiments::{execute, Outcome, Results, SeriesRow, SummaryRow};
pub use output::{write_manifest, write_tables};
pub use plotdata::{emit_plotdata, render_plotdata};

use crate::Error;

/// Environment variable replacing the default output root `results/`.
pub const OUT_DIR_ENV: &str = "RANKONE_OUT_DIR";

/// `--out` / config `out` if given, else `$RANKONE_OUT_DIR/<experiment>`,
/// else `results/<experiment>`.
pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    if let Some(out) = &cfg.out {
        return out.clone();
    }
    let root = std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"));
    root.join(cfg.experiment.name())
}

/// Why a command did not succeed, with its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid input (exit 2).
    Input(String),
    /// A check failed or the computation broke down (exit 1).
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Check(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Check(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => Failure::Input(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

/// Finished run: where the files went and what was checked.
#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub outcome: Outcome,
}

/// Loads, validates and runs a config, then writes its artifacts. A run
/// whose checks fail still writes all files and returns `Ok`; inspect
/// `outcome.passed()`.
pub fn run(config_path: &Path, overrides: &Overrides) -> Result<RunReport, Failure> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    cfg.apply(overrides);
    let gamma = cfg.validate()?;
    let outcome = execute(&cfg)?;
    let dir = output_dir(&cfg);
    let io = |e: std::io::Error| Failure::Input(format!("cannot write to {}: {e}", dir.display()));
    write_tables(&dir, &outcome).map_err(io)?;
    write_manifest(&dir, &cfg, gamma, &outcome).map_err(io)?;
    Ok(RunReport { dir, outcome })
}
