use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Numeric,
}

/// One line of a verification report.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub schema_version: u32,
    pub check: String,
    pub mode: Mode,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub time_ms: u64,
    pub detail: String,
}

impl Row {
    pub fn exact(check: impl Into<String>, ok: bool, detail: impl Into<String>) -> Row {
        Row {
            schema_version: REPORT_SCHEMA_VERSION,
            check: check.into(),
            mode: Mode::Exact,
            status: if ok { Status::Pass } else { Status::Fail },
            residual: None,
            tolerance: None,
            time_ms: 0,
            detail: detail.into(),
        }
    }

    /// Passes iff `residual <= tolerance` (a NaN residual fails).
    pub fn numeric(check: impl Into<String>, residual: f64, tolerance: f64, detail: impl Into<String>) -> Row {
        Row {
            schema_version: REPORT_SCHEMA_VERSION,
            check: check.into(),
            mode: Mode::Numeric,
            status: if residual <= tolerance { Status::Pass } else { Status::Fail },
            residual: Some(residual),
            tolerance: Some(tolerance),
            time_ms: 0,
            detail: detail.into(),
        }
    }

    pub fn failed(check: impl Into<String>, mode: Mode, detail: impl Into<String>) -> Row {
        Row {
            schema_version: REPORT_SCHEMA_VERSION,
            check: check.into(),
            mode,
            status: Status::Fail,
            residual: None,
            tolerance: None,
            time_ms: 0,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Writes one JSON object per line to `out`, or to stdout when `out` is `None`.
pub fn write_lines<T: Serialize>(rows: &[T], out: Option<&Path>) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut buf, row)?;
        buf.push(b'\n');
    }
    match out {
        Some(path) => std::fs::write(path, buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

pub fn summarize(rows: &[Row]) {
    let failed: Vec<&Row> = rows.iter().filter(|r| !r.passed()).collect();
    eprintln!("{} checks, {} passed, {} failed", rows.len(), rows.len() - failed.len(), failed.len());
    for r in failed {
        match (r.residual, r.tolerance) {
            (Some(res), Some(tol)) => eprintln!("  FAIL {}: residual {res:e} > {tol:e} {}", r.check, r.detail),
            _ => eprintln!("  FAIL {}: {}", r.check, r.detail),
        }
    }
}
