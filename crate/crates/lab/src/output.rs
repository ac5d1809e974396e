//! CSV tables and the run metadata document.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::LabResult;

/// Bumped whenever a column is added, removed or renamed.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// One CSV file: a header naming every column plus string rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| (*h).to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write(&self, dir: &Path) -> LabResult<PathBuf> {
        let path = dir.join(self.file_name());
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Empty cell for an undefined value.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Everything a command produced besides the files it writes.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub results: Value,
    /// Human-readable summary printed on success.
    pub stdout: String,
    /// Set when the results contain corridors or exploratory summaries.
    pub engineering_corridors: bool,
}

pub fn metadata(config: &RunConfig, report: &Report, threads: usize, wall_time_s: f64) -> LabResult<Value> {
    let csv: Vec<Value> = report
        .tables
        .iter()
        .map(|t| json!({"file": t.file_name(), "columns": t.header, "rows": t.rows.len()}))
        .collect();
    let mut meta = json!({
        "command": config.command.id(),
        "config_fingerprint": config.fingerprint()?,
        "versions": {
            "silt-lab": env!("CARGO_PKG_VERSION"),
            "silt-core": silt_core::VERSION,
        },
        "generator": silt_core::path::GENERATOR_ID,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "csv": csv,
        "threads": threads,
        "wall_time_s": wall_time_s,
        "effective_config": serde_json::to_value(config)?,
        "results": report.results,
    });
    if report.engineering_corridors {
        meta["corridors"] = json!(
            "tolerance corridors and summaries in these results are engineering choices; \
             no finite-sample rate toward the limiting constants is known"
        );
    }
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 5.850_448_3, -2.5e-17, 1e300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt(None), "");
    }

    #[test]
    fn table_writes_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo", &["replica_index", "value"]);
        t.push(vec!["0".into(), num(0.5)]);
        let path = t.write(dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "replica_index,value\n0,0.5\n");
    }
}
