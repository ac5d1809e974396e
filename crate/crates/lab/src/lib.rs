//! Batch front end for the `silt-core` estimators.
//!
//! A run is fully described by a [`RunConfig`]. [`run`] executes it on a
//! bounded worker pool and writes one or more CSV files plus
//! `metadata.json` into the configured output directory. Emitted numbers do
//! not depend on the pool size.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;

use std::time::Instant;

use serde_json::Value;

pub use config::{Command, RunConfig};
pub use error::{LabError, LabResult};
pub use output::Report;

/// What a finished run left behind.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub metadata: Value,
    pub files: Vec<std::path::PathBuf>,
}

pub fn run(config: &RunConfig) -> LabResult<RunOutcome> {
    config.validate()?;
    let threads = config::effective_threads(config);
    let exec = exec::PoolExecutor::new(threads)?;
    let start = Instant::now();
    let report = commands::dispatch(config, &exec)?;
    let wall = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(&config.out)?;
    let mut files = Vec::with_capacity(report.tables.len() + 1);
    for t in &report.tables {
        files.push(t.write(&config.out)?);
    }
    let metadata = output::metadata(config, &report, threads, wall)?;
    let meta_path = config.out.join("metadata.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&metadata)? + "\n")?;
    files.push(meta_path);
    Ok(RunOutcome {
        report,
        metadata,
        files,
    })
}
