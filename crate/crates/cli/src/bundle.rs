//! Stage outputs: tables, checks and the provenance block written with them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::CliError;

pub const TOOL: &str = "bogoliubov";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the configuration, see [`crate::config::RunConfig::hash`].
    pub config_hash: String,
    pub seed: u64,
    pub stage: String,
}

impl Provenance {
    pub fn new(stage: &str, config_hash: &str, seed: u64) -> Self {
        Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash.into(),
            seed,
            stage: stage.into(),
        }
    }
}

/// A thresholded quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The relation being tested, as a formula.
    pub claim: String,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, claim: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            value,
            threshold: format!("<= {limit:e}"),
            passed: value <= limit,
        }
    }

    pub fn below(name: &str, claim: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            value,
            threshold: format!("< {limit}"),
            passed: value < limit,
        }
    }

    pub fn within(name: &str, claim: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            claim: claim.into(),
            value,
            threshold: format!("{target} +- {tolerance:e}"),
            passed: (value - target).abs() <= tolerance,
        }
    }
}

/// One table cell; integers keep their exact form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Self::Text(x.into())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Self::Text(if x { "pass" } else { "fail" }.into())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Self::Int(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Self::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Self::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub description: String,
    /// Formulas of the quantities the table contains.
    pub claims: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, description: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            claims: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn claim(mut self, claim: &str) -> Self {
        self.claims.push(claim.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV with `#` comment lines, floats in 17-digit scientific notation.
    pub fn to_csv(&self, provenance: &Provenance) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} stage={}", provenance.tool, provenance.version, provenance.stage);
        let _ = writeln!(out, "# config_sha256={}", provenance.config_hash);
        let _ = writeln!(out, "# seed={}", provenance.seed);
        let _ = writeln!(out, "# {}", self.description);
        for c in &self.claims {
            let _ = writeln!(out, "# claim: {c}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(x) => format!("{x:.16e}"),
                    Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub path: PathBuf,
    pub description: String,
    pub claims: Vec<String>,
}

/// Everything one stage produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub stage: String,
    pub provenance: Provenance,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
    /// Stage-specific scalar results.
    pub summary: serde_json::Value,
    pub passed: bool,
}

impl ReportBundle {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            stage: provenance.stage.clone(),
            provenance,
            artifacts: Vec::new(),
            checks: Vec::new(),
            summary: serde_json::Value::Null,
            passed: true,
        }
    }

    pub fn bundle_path(out_dir: &Path, stage: &str) -> PathBuf {
        out_dir.join(format!("{stage}.json"))
    }

    pub fn check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    /// Writes `table` under `<out>/<stage>/` in the requested format.
    pub fn write_table(&mut self, out_dir: &Path, format: Format, table: &Table) -> Result<(), CliError> {
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let rel = PathBuf::from(&self.stage).join(format!("{}.{ext}", table.name));
        let body = match format {
            Format::Csv => table.to_csv(&self.provenance),
            Format::Json => {
                let doc = serde_json::json!({ "provenance": &self.provenance, "table": table });
                pretty(&doc)
            }
        };
        write_file(&out_dir.join(&rel), body.as_bytes())?;
        self.artifacts.push(Artifact {
            path: rel,
            description: table.description.clone(),
            claims: table.claims.clone(),
        });
        Ok(())
    }

    /// Writes an already-serialized JSON document under `<out>/<stage>/`.
    pub fn write_json(
        &mut self,
        out_dir: &Path,
        name: &str,
        description: &str,
        claims: Vec<String>,
        value: &impl Serialize,
    ) -> Result<(), CliError> {
        let rel = PathBuf::from(&self.stage).join(format!("{name}.json"));
        write_file(&out_dir.join(&rel), pretty(value).as_bytes())?;
        self.artifacts.push(Artifact {
            path: rel,
            description: description.into(),
            claims,
        });
        Ok(())
    }

    /// Writes the bundle itself to `<out>/<stage>.json`.
    pub fn finish(&self, out_dir: &Path) -> Result<PathBuf, CliError> {
        let path = Self::bundle_path(out_dir, &self.stage);
        write_file(&path, pretty(self).as_bytes())?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Numeric(format!("{}: {e}", path.display())))
    }
}

pub fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}
