//! Report and CSV writers.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::json;

use crate::jobs::{DataTable, JobReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// `report.json` only.
    Report,
    /// CSV tables only.
    Csv,
    Both,
}

pub fn report_json(reports: &[JobReport]) -> String {
    let mut text = serde_json::to_string_pretty(&json!({ "jobs": reports })).expect("reports serialize");
    text.push('\n');
    text
}

/// Job reports with timing removed, for byte-level comparison.
pub fn payload_json(reports: &[JobReport]) -> String {
    let jobs: Vec<_> = reports.iter().map(JobReport::payload).collect();
    serde_json::to_string_pretty(&json!({ "jobs": jobs })).expect("reports serialize")
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn write_csv(path: &Path, table: &DataTable) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()
}

/// Write the requested artifacts into `dir` and return their paths.
pub fn write_outputs(dir: &Path, reports: &[JobReport], format: Format) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, Format::Report | Format::Both) {
        let path = dir.join("report.json");
        fs::write(&path, report_json(reports))?;
        written.push(path);
    }
    if matches!(format, Format::Csv | Format::Both) {
        for report in reports {
            for table in &report.tables {
                let path = dir.join(format!("{}_{}.csv", sanitize(&report.name), sanitize(&table.name)));
                write_csv(&path, table)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
