use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::output::fmt;
use crate::{Error, Result};

fn log10_or_nan(x: f64) -> f64 {
    if x > 0.0 {
        x.log10()
    } else {
        f64::NAN
    }
}

/// Experiment name from a `manifest.toml` next to the CSV, else the file stem.
fn experiment_name(csv: &Path) -> String {
    let manifest = csv.with_file_name("manifest.toml");
    std::fs::read_to_string(manifest)
        .ok()
        .and_then(|t| t.parse::<toml::Table>().ok())
        .and_then(|t| t.get("experiment").and_then(|v| v.as_str()).map(String::from))
        .unwrap_or_else(|| {
            csv.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "unknown".into())
        })
}

/// Renders a results CSV as whitespace-separated `log10` columns
/// (`n`, `mean`, `bound`, plus a `±SE` half-width when any standard error
/// is non-zero), one block per β. Rows at `n = 0` are dropped.
pub fn render_plotdata(csv_path: &Path) -> Result<String> {
    let mut reader = csv::Reader::from_path(csv_path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", csv_path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::invalid(format!("{}: {e}", csv_path.display())))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(i_n), Some(i_beta), Some(i_mean), Some(i_bound)) = (col("n"), col("beta"), col("mean"), col("bound")) else {
        return Err(Error::invalid(format!(
            "{}: missing columns; need n, beta, mean and bound, found [{}]",
            csv_path.display(),
            headers.iter().collect::<Vec<_>>().join(", ")
        )));
    };
    let i_se = col("stderr");

    let parse = |field: Option<&str>, what: &str, line: u64| -> Result<f64> {
        field
            .ok_or_else(|| Error::invalid(format!("line {line}: missing {what}")))?
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::invalid(format!("line {line}: bad {what}: {e}")))
    };
    // blocks keyed by the β column text keep first-seen order stable
    let mut order: Vec<String> = Vec::new();
    let mut blocks: BTreeMap<String, Vec<[f64; 4]>> = BTreeMap::new();
    let mut any_se = false;
    let mut n_rows = 0usize;
    for (k, rec) in reader.records().enumerate() {
        let line = k as u64 + 2;
        let rec = rec.map_err(|e| Error::invalid(format!("{}: {e}", csv_path.display())))?;
        n_rows += 1;
        let n = parse(rec.get(i_n), "n", line)?;
        let mean = parse(rec.get(i_mean), "mean", line)?;
        let bound = parse(rec.get(i_bound), "bound", line)?;
        let se = match i_se {
            Some(i) => parse(rec.get(i), "stderr", line)?,
            None => 0.0,
        };
        any_se |= se != 0.0;
        let beta = rec.get(i_beta).unwrap_or_default().to_string();
        if n <= 0.0 {
            continue;
        }
        if !blocks.contains_key(&beta) {
            order.push(beta.clone());
        }
        blocks.entry(beta).or_default().push([n, mean, bound, se]);
    }
    if n_rows == 0 {
        return Err(Error::invalid(format!("{}: no data rows", csv_path.display())));
    }

    let mut out = String::new();
    let _ = writeln!(out, "# experiment: {}", experiment_name(csv_path));
    let _ = writeln!(
        out,
        "# columns: log10_n log10_mean log10_bound{}",
        if any_se { " log10_se_halfwidth" } else { "" }
    );
    for (b, beta) in order.iter().enumerate() {
        if b > 0 {
            out.push_str("\n\n");
        }
        let beta_value: f64 = beta.parse().unwrap_or(f64::NAN);
        let _ = writeln!(out, "# beta = {beta_value}");
        for [n, mean, bound, se] in &blocks[beta] {
            let _ = write!(out, "{} {} {}", fmt(n.log10()), fmt(log10_or_nan(*mean)), fmt(log10_or_nan(*bound)));
            if any_se {
                let _ = write!(out, " {}", fmt(log10_or_nan(1.0 + se / mean)));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Writes the plot file (default: `<stem>.plot.dat` beside the CSV) and
/// returns its path.
pub fn emit_plotdata(csv_path: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let text = render_plotdata(csv_path)?;
    let target = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            csv_path.with_file_name(format!("{stem}.plot.dat"))
        }
    };
    std::fs::write(&target, text).map_err(|e| Error::invalid(format!("cannot write {}: {e}", target.display())))?;
    Ok(target)
}
