//! One-parameter sweeps of a device file.

use kerrlaw::exec::{map_ordered, Execution};

use crate::device::{key_spec, DeviceFile};
use crate::error::{CliError, Result};
use crate::output::Table;
use crate::report::{run_prediction, Cell};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

/// Evenly spaced values; a zero-width range collapses to one point.
pub fn sweep_values(spec: &SweepSpec) -> Result<Vec<f64>> {
    if spec.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    if spec.from == spec.to || spec.points == 1 {
        return Ok(vec![spec.from]);
    }
    let n = spec.points - 1;
    Ok((0..=n)
        .map(|i| {
            if i == n {
                spec.to
            } else {
                spec.from + (spec.to - spec.from) * i as f64 / n as f64
            }
        })
        .collect())
}

/// Parses a bound such as `0.25` or `5 GHz` in the unit family of `param`.
pub fn parse_bound(dev: &DeviceFile, param: &str, text: &str) -> Result<f64> {
    let spec = key_spec(dev.platform, param).ok_or_else(|| not_sweepable(dev, param))?;
    crate::device::parse_quantity(spec.kind, text).map_err(|m| CliError::Usage(format!("bound `{text}` for {param}: {m}")))
}

fn not_sweepable(dev: &DeviceFile, param: &str) -> CliError {
    CliError::Usage(format!(
        "`{param}` is not sweepable for platform {} (sweepable: {})",
        dev.platform,
        dev.sweepable_keys().join(", ")
    ))
}

/// One row per point: the swept value followed by every report quantity.
pub fn sweep(dev: &DeviceFile, spec: &SweepSpec, exec: Execution) -> Result<Table> {
    if !dev.sweepable_keys().contains(&spec.param.as_str()) {
        return Err(not_sweepable(dev, &spec.param));
    }
    let values = sweep_values(spec)?;
    let reports: Vec<_> = map_ordered(&values, exec, |&v| run_prediction(&dev.with_num(&spec.param, v)))
        .into_iter()
        .collect::<Result<_>>()?;
    let first = &reports[0];
    let mut columns = vec![format!("sweep_{}", spec.param)];
    columns.extend(first.rows().map(|q| q.name.clone()));
    let mut table = Table::new(columns);
    for (v, r) in values.iter().zip(&reports) {
        let mut row = vec![Cell::Num(*v)];
        row.extend(r.rows().map(|q| q.value.clone()));
        table.push(row);
    }
    Ok(table)
}

/// Column subset shown by the human table format.
pub fn summary_columns(table: &Table) -> Table {
    const KEEP: &[&str] = &[
        "flux_used", "phi_min", "c2_hz", "c3_hz", "c4_hz", "abs_eps", "e4_hz", "eta_used", "chi_hz", "chi_unc_hz",
        "deviation_pct", "regime",
    ];
    let idx: Vec<usize> = table
        .columns
        .iter()
        .enumerate()
        .filter(|(i, c)| *i == 0 || KEEP.contains(&c.as_str()))
        .map(|(i, _)| i)
        .collect();
    let mut out = Table::new(idx.iter().map(|&i| table.columns[i].clone()));
    for row in &table.rows {
        out.push(idx.iter().map(|&i| row[i].clone()).collect());
    }
    out
}
