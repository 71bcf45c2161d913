//! Device-file driven front end for the `kerrlaw` crate.
//!
//! [`run`] executes one parsed command and returns the text to print and the
//! process exit code, so the binary stays a thin wrapper.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod device;
pub mod error;
pub mod oracle;
pub mod output;
pub mod report;
pub mod sweep;
pub mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use kerrlaw::exec::Execution;

use crate::device::DeviceFile;
use crate::error::{CliError, EXIT_ACCEPTANCE, EXIT_OK};
use crate::output::{Format, Table};
use crate::report::{Cell, PredictionReport};

#[derive(Debug, Parser)]
#[command(name = "kerrlaw", version, about = "Kerr-rate predictions from device files")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub output: Format,

    /// Print nothing on success; errors still go to stderr.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the prediction chain for one device file.
    Predict { device: PathBuf },
    /// Recompute every `*.device` file in a directory and check reported deviations.
    Validate { dir: PathBuf },
    /// Vary one numeric key over a range.
    Sweep {
        device: PathBuf,
        #[arg(long)]
        param: String,
        /// Lower bound, with a unit where the key takes one (e.g. `5GHz`).
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long)]
        points: usize,
    },
    /// Diagonalize the few-mode Hamiltonian at perturbation parameter `lambda`.
    OracleCheck {
        device: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Per-mode Fock truncation.
        #[arg(long, default_value_t = kerrlaw::fock::DEFAULT_DIM)]
        dim: usize,
    },
}

pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub fn report_table(r: &PredictionReport) -> Table {
    let mut t = Table::new(["quantity", "value", "unit", "provenance"]);
    for q in r.rows() {
        t.push(vec![
            Cell::Text(q.name.clone()),
            q.value.clone(),
            Cell::Text(q.unit.into()),
            Cell::Text(q.provenance.to_string()),
        ]);
    }
    t
}

fn human_predict(r: &PredictionReport) -> Table {
    let mut full = report_table(r);
    full.rows.retain(|row| row[1] != Cell::Missing);
    full
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let (table, code) = match &cli.command {
        Command::Predict { device } => {
            let r = report::run_prediction(&DeviceFile::read(device)?)?;
            let t = if cli.output == Format::Table { human_predict(&r) } else { report_table(&r) };
            (t, EXIT_OK)
        }
        Command::Validate { dir } => {
            let rows = table::validate_table(dir, exec)?;
            let code = if table::all_pass(&rows) { EXIT_OK } else { EXIT_ACCEPTANCE };
            (table::rows_to_table(&rows), code)
        }
        Command::Sweep { device, param, from, to, points } => {
            let dev = DeviceFile::read(device)?;
            let spec = sweep::SweepSpec {
                param: param.clone(),
                from: sweep::parse_bound(&dev, param, from)?,
                to: sweep::parse_bound(&dev, param, to)?,
                points: *points,
            };
            let t = sweep::sweep(&dev, &spec, exec)?;
            let t = if cli.output == Format::Table { sweep::summary_columns(&t) } else { t };
            (t, EXIT_OK)
        }
        Command::OracleCheck { device, lambda, dim } => {
            let r = oracle::oracle_check(&DeviceFile::read(device)?, *lambda, *dim)?;
            (oracle::report_table(&r), if r.pass { EXIT_OK } else { EXIT_ACCEPTANCE })
        }
    };
    let stdout = if cli.quiet { String::new() } else { table.render(cli.output) };
    Ok(Outcome { stdout, code })
}
