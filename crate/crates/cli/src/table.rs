//! Cross-platform validation table over a directory of device files.

use std::path::{Path, PathBuf};

use kerrlaw::exec::{map_ordered, Execution};
use serde::Serialize;

use crate::device::{DeviceFile, Platform};
use crate::error::{CliError, Result};
use crate::output::Table;
use crate::report::{run_prediction, Cell, PredictionReport};

/// Allowed gap between the recomputed and the reported deviation, in
/// percentage points.
pub const DELTA_TOLERANCE_PP: f64 = 0.15;
/// A Kerr-free row passes when `|χ|` falls below this fraction of its
/// zero-flux value.
pub const KERR_FREE_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Pass,
    Fail,
    /// Nothing to compare against.
    Unchecked,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => "FAIL",
            RowStatus::Unchecked => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub file: String,
    pub label: String,
    pub platform: Platform,
    pub e4_hz: f64,
    pub eta: f64,
    pub chi_pred_hz: f64,
    pub chi_meas_hz: Option<f64>,
    pub delta_pct: Option<f64>,
    pub reported_delta_pct: Option<f64>,
    pub status: RowStatus,
    pub note: String,
}

/// `*.device` files in name order.
pub fn device_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut files = Vec::new();
    for e in entries {
        let path = e
            .map_err(|source| CliError::Io {
                path: dir.to_owned(),
                source,
            })?
            .path();
        if path.extension().is_some_and(|x| x == "device") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .device files", dir.display())));
    }
    Ok(files)
}

fn snail_row(dev: &DeviceFile, report: &PredictionReport) -> Result<(RowStatus, String)> {
    let at_zero = run_prediction(&dev.with_num("flux", 0.0))?;
    let chi0 = at_zero.prediction.chi_over_2pi.abs();
    let chi = report.prediction.chi_over_2pi.abs();
    let ratio = if chi0 > 0.0 { chi / chi0 } else { f64::INFINITY };
    let status = if ratio < KERR_FREE_RATIO { RowStatus::Pass } else { RowStatus::Fail };
    Ok((status, format!("|chi|/|chi(flux=0)| = {ratio:.3e} at flux {:.6}", report.num("flux_used").unwrap_or(f64::NAN))))
}

fn row(path: &Path) -> Result<ValidationRow> {
    let dev = DeviceFile::read(path)?;
    let report = run_prediction(&dev)?;
    let chi = report.prediction.chi_over_2pi;
    let meas = dev.num("measured_chi");
    let delta = report.prediction.deviation_pct;
    let reported = dev.num("reported_delta_pct");
    let (status, note) = if dev.platform == Platform::Snail && dev.text("flux").is_some() {
        snail_row(&dev, &report)?
    } else {
        match (delta, reported) {
            (Some(d), Some(r)) => {
                let gap = (d - r).abs();
                let status = if gap <= DELTA_TOLERANCE_PP { RowStatus::Pass } else { RowStatus::Fail };
                (status, format!("|delta - reported| = {gap:.3} pp (tolerance {DELTA_TOLERANCE_PP})"))
            }
            _ => (RowStatus::Unchecked, String::new()),
        }
    };
    Ok(ValidationRow {
        file: path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
        label: report.label.clone(),
        platform: dev.platform,
        e4_hz: report.num("e4_hz").unwrap_or(f64::NAN),
        eta: report.num("eta_used").unwrap_or(f64::NAN),
        chi_pred_hz: chi,
        chi_meas_hz: meas,
        delta_pct: delta,
        reported_delta_pct: reported,
        status,
        note,
    })
}

/// Builds every row; the first file that fails to parse or predict aborts.
pub fn validate_table(dir: &Path, exec: Execution) -> Result<Vec<ValidationRow>> {
    let files = device_files(dir)?;
    map_ordered(&files, exec, |p| row(p)).into_iter().collect()
}

pub fn rows_to_table(rows: &[ValidationRow]) -> Table {
    let mut t = Table::new([
        "file",
        "platform",
        "e4_hz",
        "eta",
        "chi_pred_hz",
        "chi_meas_hz",
        "delta_pct",
        "reported_delta_pct",
        "status",
        "note",
    ]);
    let opt = |v: Option<f64>| v.map_or(Cell::Missing, Cell::Num);
    for r in rows {
        t.push(vec![
            Cell::Text(r.file.clone()),
            Cell::Text(r.platform.to_string()),
            Cell::Num(r.e4_hz),
            Cell::Num(r.eta),
            Cell::Num(r.chi_pred_hz),
            opt(r.chi_meas_hz),
            opt(r.delta_pct),
            opt(r.reported_delta_pct),
            Cell::Text(r.status.name().into()),
            Cell::Text(r.note.clone()),
        ]);
    }
    t
}

pub fn all_pass(rows: &[ValidationRow]) -> bool {
    rows.iter().all(|r| r.status != RowStatus::Fail)
}
