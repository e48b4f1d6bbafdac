//! CSV emission with a `#`-prefixed provenance header.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;

/// Full double precision: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header lines shared by every output file.
pub fn provenance(config: &ExperimentConfig) -> Vec<String> {
    vec![
        format!("dfrc {}", env!("CARGO_PKG_VERSION")),
        format!("config_sha256 = {}", config.hash()),
        format!("seed = {}", config.seed),
    ]
}

/// Writes `<dir>/<name>` as CSV: metadata lines prefixed with `# `, then the
/// column names, then `rows`.
pub fn write_csv(
    dir: &Path,
    name: &str,
    metadata: &[String],
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for line in metadata {
        writeln!(out, "# {line}")?;
    }
    let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    csv.write_record(columns)?;
    for row in rows {
        csv.write_record(row)?;
    }
    csv.flush()?;
    Ok(path)
}

/// Writes a plain-text file.
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
