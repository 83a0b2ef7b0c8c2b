use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use bispectral_core::continuation::{run_continuation, ContinuationRow};
use bispectral_core::numeric::ComplexParams;
use bispectral_core::series::{check_const_identity, check_gauge, random_exp_sum, regular_x_points};
use bispectral_core::Error;
use clap::Args;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::report::{self, Mode, Row, Status, REPORT_SCHEMA_VERSION};

#[derive(Args)]
pub struct ContinueArgs {
    #[arg(long, default_value_t = 1)]
    l: usize,
    /// Complex, e.g. `1.5+0.2i`; the real part must be positive.
    #[arg(long, allow_hyphen_values = true)]
    k: Complex64,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    p: Complex64,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    r: Complex64,
    /// Largest height; the truncation check runs at every even height from 4 up to it.
    #[arg(long, default_value_t = 8)]
    height: u32,
    #[arg(long, default_value_t = 5)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance for the per-exponent identities.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn heights(top: u32) -> Vec<u32> {
    let mut hs: Vec<u32> = (4..=top).step_by(2).collect();
    if hs.last() != Some(&top) {
        hs.push(top);
    }
    hs
}

fn residual_of(r: Result<f64, Error>) -> Result<f64, Error> {
    match r {
        Err(Error::ResidualExceeded { residual, .. }) => Ok(residual),
        other => other,
    }
}

/// Truncated `D` residuals must strictly decrease with the height at every point.
fn monotone_row(rows: &[ContinuationRow]) -> Row {
    let mut by_point: BTreeMap<usize, Vec<(u32, f64)>> = BTreeMap::new();
    for r in rows {
        by_point.entry(r.point).or_default().push((r.height, r.d_residual));
    }
    let bad: Vec<usize> = by_point
        .iter()
        .filter(|(_, v)| v.windows(2).any(|w| w[1].1.partial_cmp(&w[0].1) != Some(std::cmp::Ordering::Less)))
        .map(|(p, _)| *p)
        .collect();
    let mut row = Row::exact(
        "truncation.monotone",
        bad.is_empty(),
        if bad.is_empty() { "D residual decreases with the height at every point".into() } else { format!("not decreasing at points {bad:?}") },
    );
    row.mode = Mode::Numeric;
    row
}

fn check_rows(cp: &ComplexParams, rows: &[ContinuationRow], top: u32, args: &ContinueArgs) -> anyhow::Result<Vec<Row>> {
    let max = |f: fn(&ContinuationRow) -> f64, filter: &dyn Fn(&ContinuationRow) -> bool| {
        rows.iter().filter(|r| filter(r)).map(f).fold(0.0_f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    };
    let mut out = vec![Row::numeric(
        "dtilde.identities",
        max(|r| r.dtilde_residual, &|_| true),
        args.tol,
        format!("heights <= {top} at {} points", args.points),
    )];
    if heights(top).len() > 1 {
        out.push(monotone_row(rows));
    }
    out.push(Row::numeric(
        "truncation.l_residual",
        max(|r| r.l_residual, &|r| r.height == top),
        1e-6,
        format!("L phi - (z^2 - rho^2) phi at height {top}"),
    ));
    let pts = regular_x_points(cp, 20, args.seed);
    out.push(Row::numeric("const.identity", residual_of(check_const_identity(cp, &pts, 1e-10))?, 1e-10, "20 seeded points"));
    let g = random_exp_sum(cp.nvars(), 4, args.seed);
    let pts = regular_x_points(cp, 20, args.seed.wrapping_add(1));
    out.push(Row::numeric("gauge.relation", residual_of(check_gauge(cp, &g, &pts, 1e-10))?, 1e-10, "20 seeded points"));
    Ok(out)
}

fn tagged(kind: &str, v: Value) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("schema_version".into(), json!(REPORT_SCHEMA_VERSION));
    obj.insert("kind".into(), json!(kind));
    if let Value::Object(fields) = v {
        obj.extend(fields.into_iter().filter(|(k, _)| k != "schema_version" && k != "time_ms"));
    }
    Value::Object(obj)
}

/// Output is a pure function of the arguments: no timings are recorded.
pub fn cmd_continue(args: ContinueArgs) -> anyhow::Result<bool> {
    let cp = ComplexParams::new(args.l, args.k, args.p, args.r)?;
    let hs = heights(args.height);
    let rows = run_continuation(&cp, &hs, args.points, args.seed)?;
    let checks = check_rows(&cp, &rows, args.height, &args)?;

    let mut lines: Vec<Value> = Vec::with_capacity(rows.len() + checks.len());
    for r in &rows {
        lines.push(tagged("point", serde_json::to_value(r).context("serializing row")?));
    }
    for c in &checks {
        lines.push(tagged("check", serde_json::to_value(c).context("serializing check")?));
    }
    report::write_lines(&lines, args.out.as_deref())?;
    report::summarize(&checks);
    Ok(checks.iter().all(|c| c.status == Status::Pass))
}
