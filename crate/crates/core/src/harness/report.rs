use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::study::{CaseReport, StudyReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "level",
    "dof",
    "exact_error",
    "estimated_error",
    "recovered_error",
    "theta",
    "mD",
    "sigmaD",
    "rate_exact",
    "rate_est",
];

#[derive(Serialize)]
struct CsvRow {
    level: u32,
    dof: usize,
    exact_error: f64,
    estimated_error: f64,
    recovered_error: f64,
    theta: Option<f64>,
    m_d: f64,
    sigma_d: f64,
    rate_exact: Option<f64>,
    rate_est: Option<f64>,
}

fn pairwise_rate(prev: &CaseReport, next: &CaseReport, value: fn(&CaseReport) -> f64) -> Option<f64> {
    let (a, b) = (value(prev), value(next));
    if !(a > 0.0 && b > 0.0) {
        return None;
    }
    let dn = (next.errors.dof as f64).ln() - (prev.errors.dof as f64).ln();
    Some(-(b.ln() - a.ln()) / dn)
}

/// One row per level; the rate columns compare a level with the previous one.
pub fn write_csv<W: Write>(report: &StudyReport, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for (i, c) in report.cases.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| &report.cases[j]);
        w.serialize(CsvRow {
            level: c.level,
            dof: c.errors.dof,
            exact_error: c.errors.exact,
            estimated_error: c.errors.estimated,
            recovered_error: c.errors.recovered,
            theta: c.errors.theta,
            m_d: c.errors.mean_abs_d,
            sigma_d: c.errors.sigma_d,
            rate_exact: prev.and_then(|p| pairwise_rate(p, c, |r| r.errors.exact)),
            rate_est: prev.and_then(|p| pairwise_rate(p, c, |r| r.errors.estimated)),
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// The full report, per-element arrays included.
pub fn write_json<W: Write>(report: &StudyReport, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| Error::Io(e.into()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json(text: &str) -> Result<StudyReport> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed report: {e}")))
}

/// Writes `<dir>/<study name>.<ext>` and returns its path.
pub fn emit_report(report: &StudyReport, format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    let path = dir.join(format!("{}.{}", report.config.name(), format.extension()));
    let mut buf = Vec::new();
    match format {
        ReportFormat::Csv => write_csv(report, &mut buf)?,
        ReportFormat::Json => write_json(report, &mut buf)?,
    }
    fs::write(&path, buf).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(path)
}
