//! Run reports (JSON) and curve tables (CSV).

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use mirror_core::scenarios::CurveRow;
use serde::Serialize;

use crate::{Result, ToolError};

/// Curve CSV columns, in order.
pub const CURVE_COLUMNS: [&str; 8] = [
    "qz",
    "qx",
    "rate",
    "rate_throughput_weighted",
    "bb84_rate",
    "sae_lower",
    "h_a_given_b",
    "feasible",
];

/// Self-describing record of one invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport<P: Serialize, R: Serialize> {
    /// Tool name.
    pub tool: &'static str,
    /// Tool version.
    pub version: &'static str,
    /// Subcommand.
    pub command: &'static str,
    /// RNG seed.
    pub seed: u64,
    /// Inputs needed to reproduce the run.
    pub config: P,
    /// Outputs.
    pub results: R,
    /// Wall-clock time in seconds.
    pub wall_time_s: f64,
}

impl<P: Serialize, R: Serialize> RunReport<P, R> {
    /// Report for `command`.
    pub fn new(command: &'static str, seed: u64, config: P, results: R, wall_time_s: f64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            results,
            wall_time_s,
        }
    }

    /// Pretty JSON to `path`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let io_err = |source| ToolError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut f = File::create(path).map_err(io_err)?;
        serde_json::to_writer_pretty(&mut f, self).map_err(|source| ToolError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        writeln!(f).map_err(io_err)
    }
}

/// `x` with 12 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes the curve table.
pub fn write_curve<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_COLUMNS)?;
    for r in rows {
        let nums = [
            r.qz,
            r.qx,
            r.rate,
            r.rate_throughput_weighted,
            r.bb84_rate,
            r.sae_lower,
            r.h_a_given_b,
        ]
        .map(format_number);
        let feasible = if r.feasible { "true" } else { "false" };
        w.write_record(nums.iter().map(String::as_str).chain([feasible]))?;
    }
    w.flush().map_err(|source| ToolError::Io {
        path: "<csv>".into(),
        source,
    })
}

/// Curve table to `path`, or stdout when `None`.
pub fn emit_curve(rows: &[CurveRow], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|source| ToolError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            write_curve(rows, f)
        }
        None => write_curve(rows, io::stdout().lock()),
    }
}
