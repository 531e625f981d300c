//! Run reports and their on-disk form.
//!
//! `export_report` writes three files:
//!
//! * `records.jsonl`: one [`TaskRecord`] per line, in task order;
//! * `summary.csv`: one [`SummaryRow`] per image, recomputable from the
//!   records with [`summarize`];
//! * `run.json`: the whole [`RunReport`] minus labels.
//!
//! Every record and the report carry `schema`, currently
//! [`REPORT_SCHEMA`]. Times are nanoseconds in records and milliseconds
//! (three decimals) in the summary.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{BatchMode, BenchConfig};
use crate::parametric::ParametricResult;
use crate::scheduler::{MakespanReport, Policy, WorkerHandle};

pub const REPORT_SCHEMA: u32 = 1;
pub const RECORDS_NAME: &str = "records.jsonl";
pub const SUMMARY_NAME: &str = "summary.csv";
pub const RUN_NAME: &str = "run.json";
pub const SUMMARY_HEADER: [&str; 8] = [
    "schema",
    "image",
    "tasks",
    "constituents",
    "min_ms",
    "avg_ms",
    "max_ms",
    "total_flow",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub schema: u32,
    pub task: u64,
    pub image: usize,
    pub worker: usize,
    pub width: usize,
    pub height: usize,
    pub start_ns: u64,
    pub finish_ns: u64,
    pub wall_ns: u64,
    pub flow: u64,
    /// `(problem, lambda index)` per constituent, in layout order.
    pub constituents: Vec<(usize, usize)>,
    pub constituent_flows: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub schema: u32,
    pub image: usize,
    pub tasks: usize,
    pub constituents: usize,
    pub min_ms: String,
    pub avg_ms: String,
    pub max_ms: String,
    pub total_flow: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapScore {
    pub problem: usize,
    pub lambda_index: usize,
    pub intersection: u64,
    pub union: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub config: BenchConfig,
    pub policy: Policy,
    pub batch: BatchMode,
    pub workers: Vec<WorkerHandle>,
    pub records: Vec<TaskRecord>,
    pub summary: Vec<SummaryRow>,
    /// Per problem, per lambda.
    pub flows: Vec<Vec<u64>>,
    /// Measured and simulated makespans over the measured task times, ns.
    pub makespans: MakespanReport,
    /// Best overlap with the truth region over the schedule, per problem.
    pub overlaps: Vec<OverlapScore>,
    pub mean_overlap: Option<f64>,
    /// Full cuts per problem; not exported.
    #[serde(skip)]
    pub solutions: Vec<ParametricResult>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("record line {line}: {source}")]
    Record { line: usize, source: serde_json::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn ms(ns: u64) -> String {
    format!("{}.{:03}", ns / 1_000_000, (ns % 1_000_000) / 1_000)
}

/// Per-image min/avg/max task wall time, images in ascending order.
pub fn summarize(records: &[TaskRecord]) -> Vec<SummaryRow> {
    let mut by_image: BTreeMap<usize, Vec<&TaskRecord>> = BTreeMap::new();
    for r in records {
        by_image.entry(r.image).or_default().push(r);
    }
    by_image
        .into_iter()
        .map(|(image, rs)| {
            let walls: Vec<u64> = rs.iter().map(|r| r.wall_ns).collect();
            let sum: u128 = walls.iter().map(|&w| w as u128).sum();
            SummaryRow {
                schema: REPORT_SCHEMA,
                image,
                tasks: rs.len(),
                constituents: rs.iter().map(|r| r.constituents.len()).sum(),
                min_ms: ms(*walls.iter().min().unwrap()),
                avg_ms: ms((sum / walls.len() as u128) as u64),
                max_ms: ms(*walls.iter().max().unwrap()),
                total_flow: rs.iter().map(|r| r.flow).sum(),
            }
        })
        .collect()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), ReportError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error()).map_err(io_err(path))?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn write_records(path: &Path, records: &[TaskRecord]) -> Result<(), ReportError> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("record serializes");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_records(path: &Path) -> Result<Vec<TaskRecord>, ReportError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| ReportError::Record { line: i + 1, source })?);
    }
    Ok(out)
}

/// Writes `records.jsonl`, `summary.csv` and `run.json` under `dir`.
pub fn export_report(report: &RunReport, dir: &Path) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_records(&dir.join(RECORDS_NAME), &report.records)?;
    write_summary(&dir.join(SUMMARY_NAME), &summarize(&report.records))?;
    let run = dir.join(RUN_NAME);
    let mut f = fs::File::create(&run).map_err(io_err(&run))?;
    serde_json::to_writer_pretty(&mut f, report).expect("report serializes");
    f.write_all(b"\n").map_err(io_err(&run))
}

/// Rebuilds `summary.csv` from a records file.
pub fn resummarize(records: &Path, summary: &Path) -> Result<Vec<SummaryRow>, ReportError> {
    let rows = summarize(&read_records(records)?);
    write_summary(summary, &rows)?;
    Ok(rows)
}
