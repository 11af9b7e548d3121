use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiments::{Outcome, Results};

/// Seventeen significant digits, enough to round-trip an `f64`.
pub(crate) fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Writes `results.csv` and `summary.csv` into `dir`.
pub fn write_tables(dir: &Path, outcome: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("results.csv")).map_err(csv_err)?;
    match &outcome.results {
        Results::Series(rows) => {
            w.write_record(["n", "beta", "mean", "stderr", "bound", "replicas"]).map_err(csv_err)?;
            for r in rows {
                w.write_record([
                    r.n.to_string(),
                    fmt(r.beta),
                    fmt(r.mean),
                    fmt(r.stderr),
                    fmt(r.bound),
                    r.replicas.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        Results::Checks(checks) => {
            w.write_record(["name", "grid_points", "violations", "worst_margin", "passed"]).map_err(csv_err)?;
            for c in checks {
                w.write_record([
                    c.name.clone(),
                    c.grid_points.to_string(),
                    c.violations.to_string(),
                    fmt(c.worst_margin),
                    c.passed().to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(csv_err)?;
    w.write_record(["name", "value", "threshold", "passed"]).map_err(csv_err)?;
    for r in &outcome.summary {
        w.write_record([r.name.clone(), fmt(r.value), fmt(r.threshold), r.passed.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact: &'static str,
    version: &'static str,
    experiment: &'static str,
    gamma_resolved: f64,
    passed: bool,
    failed_checks: Vec<String>,
    config: &'a ExperimentConfig,
}

/// Writes `manifest.toml`: the resolved configuration, the artifact version
/// and the overall verdict.
pub fn write_manifest(dir: &Path, cfg: &ExperimentConfig, gamma: f64, outcome: &Outcome) -> std::io::Result<()> {
    let m = Manifest {
        artifact: "rankone",
        version: crate::VERSION,
        experiment: cfg.experiment.name(),
        gamma_resolved: gamma,
        passed: outcome.passed(),
        failed_checks: outcome.failures().map(|r| r.name.clone()).collect(),
        config: cfg,
    };
    let text = toml::to_string(&m).map_err(std::io::Error::other)?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("manifest.toml"), text)
}
