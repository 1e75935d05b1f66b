use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{CommandKind, ExperimentConfig};

/// Column data for one sweep.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: CommandKind,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub scalars: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Series>,
    pub assertions: Vec<Assertion>,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// SHA-256 of the canonical JSON of `(command, config)`.
pub fn config_hash(command: CommandKind, config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(&(command, config)).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

impl RunReport {
    pub fn failed(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }
}

/// Writes one column file per series, or a header-only `<command>.dat`
/// when the report has none. Returns the paths written.
pub fn emit_series(report: &RunReport, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let header = format!("# config_hash {}\n", report.config_hash);
    if report.series.is_empty() {
        let path = dir.join(format!("{}.dat", report.command.name()));
        std::fs::write(&path, &header)?;
        return Ok(vec![path]);
    }
    let mut written = Vec::new();
    for (name, s) in &report.series {
        let mut text = header.clone();
        let _ = writeln!(text, "# {}", s.columns.join(" "));
        for row in &s.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(text, "{}", cells.join(" "));
        }
        let path = dir.join(format!("{}-{name}.dat", report.command.name()));
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
