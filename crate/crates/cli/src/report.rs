//! Output files: trace CSV, summary JSON, and write-then-rename.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use geoprox::{PpaTrace, SpherePoint};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TRACE_HEADER: &str = "n,lambda,f_value,step_distance,dist_to_reference,rate_bound,fejer_ok";

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub converged: bool,
    pub iterations: usize,
    /// `f(x_last) - f(u)`; null without a reference minimizer.
    pub final_gap: Option<f64>,
    pub sup_step: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub rate_bound_satisfied: bool,
    pub fejer_satisfied: bool,
    /// Distance from the last iterate to the reference minimizer.
    pub argmin_distance: Option<f64>,
    pub wall_time_ms: u64,
    pub reference_available: bool,
    pub stop_reason: String,
    /// Set when the run ended in a solver failure.
    pub error: Option<String>,
}

/// Trace rows: `n = 0` is the initial point, row `n >= 1` describes `x_{n+1}`.
pub fn trace_rows(trace: &PpaTrace) -> Vec<String> {
    let space = &trace.space;
    let dist_ref = |x: &SpherePoint| {
        trace
            .reference
            .as_ref()
            .and_then(|u| space.distance(u, x).ok())
            .map(num)
            .unwrap_or_default()
    };
    let mut rows = Vec::with_capacity(trace.iterates.len());
    rows.push(format!(
        "0,,{},,{},,",
        num(trace.f_values[0]),
        dist_ref(trace.initial_point())
    ));
    for k in 0..trace.steps() {
        let mut row = String::new();
        write!(
            row,
            "{},{},{},{},{},",
            k + 1,
            num(trace.lambdas[k]),
            num(trace.f_values[k + 1]),
            num(trace.step_distances[k]),
            dist_ref(&trace.iterates[k + 1])
        )
        .expect("writing to a string");
        if let (Some(b), Some(ok)) = (trace.rate_bounds.get(k), trace.fejer_flags.get(k)) {
            write!(row, "{},{}", num(*b), ok).expect("writing to a string");
        } else {
            row.push(',');
        }
        rows.push(row);
    }
    rows
}

pub fn trace_csv(trace: &PpaTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for row in trace_rows(trace) {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `contents` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
