//! Run reports: a JSON document per run plus one CSV per metric table.
//!
//! A report embeds the effective configuration, an environment stamp
//! (package version + worker threads), every metric table, and the raw
//! per-cell traces the metrics were computed from, so any number in a table
//! can be recomputed offline. Wall-clock measurements live in a separate
//! `timings_seconds` map and never inside metric tables: metric tables are
//! bit-reproducible across reruns with the same seed, timings are not.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::errors::{Classify, CliError, Result};

/// A named table of metrics: column headers plus rows of JSON scalars.
#[derive(Debug, Clone, Serialize)]
pub struct MetricTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl MetricTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        MetricTable {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row arity mismatch");
        self.rows.push(row);
    }

    /// Render as CSV. JSON scalar formatting (shortest round-trip for
    /// floats) keeps the text deterministic.
    pub fn to_csv(&self) -> String {
        fn field(value: &Value) -> String {
            let text = match value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            if text.contains([',', '"', '\n']) {
                format!("\"{}\"", text.replace('"', "\"\""))
            } else {
                text
            }
        }
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(field).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Stamp describing the build and execution environment of a run.
#[derive(Debug, Clone, Serialize)]
pub struct EnvironmentStamp {
    pub version: String,
    pub threads: usize,
}

/// The full JSON report for one command invocation.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub environment: EnvironmentStamp,
    pub seed: u64,
    pub config: Value,
    pub tables: Vec<MetricTable>,
    /// Raw traces (per-cell errors, per-frame records, objective traces…)
    /// sufficient to recompute every table entry.
    pub raw: Value,
    pub timings_seconds: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, seed: u64, threads: usize, config: &impl Serialize) -> Result<Self> {
        let config = serde_json::to_value(config).input("serializing configuration echo")?;
        Ok(Report {
            command: command.to_string(),
            environment: EnvironmentStamp {
                version: env!("CARGO_PKG_VERSION").to_string(),
                threads,
            },
            seed,
            config,
            tables: Vec::new(),
            raw: Value::Null,
            timings_seconds: BTreeMap::new(),
        })
    }

    pub fn add_table(&mut self, table: MetricTable) {
        self.tables.push(table);
    }

    pub fn record_seconds(&mut self, label: &str, seconds: f64) {
        self.timings_seconds.insert(label.to_string(), seconds);
    }

    pub fn set_raw(&mut self, raw: impl Serialize) -> Result<()> {
        self.raw = serde_json::to_value(raw).input("serializing raw traces")?;
        Ok(())
    }

    /// Write `{stem}.json` plus `{stem}.{table}.csv` for every table into
    /// `out_dir`. Returns the paths written. `out_dir` must already exist.
    pub fn write(&self, out_dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        if !out_dir.is_dir() {
            return Err(CliError::input_at(
                out_dir,
                "output directory does not exist",
            ));
        }
        let mut written = Vec::new();
        let json_path = out_dir.join(format!("{stem}.json"));
        let mut text = serde_json::to_string_pretty(self).input("serializing report")?;
        text.push('\n');
        fs::write(&json_path, text).input(&format!("writing {}", json_path.display()))?;
        written.push(json_path);
        for table in &self.tables {
            let csv_path = out_dir.join(format!("{stem}.{}.csv", table.name));
            fs::write(&csv_path, table.to_csv())
                .input(&format!("writing {}", csv_path.display()))?;
            written.push(csv_path);
        }
        Ok(written)
    }
}
