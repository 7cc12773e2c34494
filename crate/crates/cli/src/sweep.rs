//! `sweep`: independent runs over a list of parameter values.

use std::path::Path;

use geoprox::sampling::{in_cap, seeded};
use geoprox::ModelSpace;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ScheduleKind, ScheduleSection};
use crate::error::{CliError, EXIT_FAILED, EXIT_OK};
use crate::report::{to_json, trace_rows, write_atomic, RunSummary, TRACE_HEADER};
use crate::run::{execute, RunOutcome};

/// Unit-metric radius of the cap that `anchors-seed` draws anchors from.
pub const ANCHOR_CAP_RADIUS: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    /// Constant step size.
    Lambda,
    /// Seed for redrawing the anchors around their original centroid.
    AnchorsSeed,
    /// Curvature bound; points are kept, so distances rescale.
    Kappa,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lambda => "lambda",
            Self::AnchorsSeed => "anchors-seed",
            Self::Kappa => "kappa",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub value: f64,
    pub ok: bool,
    pub error: Option<String>,
    pub summary: Option<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub param: String,
    pub entries: Vec<SweepEntry>,
}

/// The base configuration with `param` set to `value`.
pub fn apply(base: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig, CliError> {
    let mut cfg = base.clone();
    match param {
        SweepParam::Lambda => {
            cfg.schedule = ScheduleSection {
                kind: ScheduleKind::Constant,
                value: Some(value),
                list: None,
                asserted_divergent: false,
            };
        }
        SweepParam::Kappa => cfg.space.kappa = value,
        SweepParam::AnchorsSeed => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(CliError::Config(format!(
                    "anchors seed must be a nonnegative integer, got {value}"
                )));
            }
            let built = base.build()?;
            let anchors = built.functional.anchors();
            let center = built
                .functional
                .anchor_centroid()
                .ok_or_else(|| CliError::Config("anchors-seed sweep needs an anchored functional".into()))?;
            if !cfg.functional.terms.is_empty() {
                return Err(CliError::Config(
                    "anchors-seed sweep does not support custom_combination".into(),
                ));
            }
            let mut rng = seeded(value as u64);
            cfg.functional.anchors = (0..anchors.len())
                .map(|_| in_cap(&mut rng, &center, ANCHOR_CAP_RADIUS).coords().to_vec())
                .collect();
        }
    }
    Ok(cfg)
}

fn value_label(v: f64) -> String {
    format!("{v}")
}

fn combined_csv(param: SweepParam, values: &[f64], outcomes: &[Result<RunOutcome, CliError>]) -> String {
    let mut out = format!("{},{TRACE_HEADER}\n", param.name());
    for (v, r) in values.iter().zip(outcomes) {
        if let Ok(o) = r {
            for row in trace_rows(&o.trace) {
                out.push_str(&value_label(*v));
                out.push(',');
                out.push_str(&row);
                out.push('\n');
            }
        }
    }
    out
}

/// Runs every value in parallel. Results come back in the order of `values`.
pub fn run_sweep(base: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Vec<Result<RunOutcome, CliError>> {
    values
        .par_iter()
        .map(|v| {
            let cfg = apply(base, param, *v)?;
            execute(&cfg)
        })
        .collect()
}

/// `geoprox sweep <config> --param P --values ...`.
pub fn cmd_sweep(
    config_path: &Path,
    param: SweepParam,
    values: &[f64],
    output_dir: &Path,
    quiet: bool,
) -> Result<i32, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("no sweep values given".into()));
    }
    let base = ExperimentConfig::load(config_path)?;
    base.build()?;
    ModelSpace::new(base.space.dim, base.space.kappa)?;
    let outcomes = run_sweep(&base, param, values);
    let mut entries = Vec::with_capacity(values.len());
    for (v, r) in values.iter().zip(&outcomes) {
        let entry = match r {
            Ok(o) => {
                let label = value_label(*v);
                write_atomic(
                    &output_dir.join(format!("summary_{}_{label}.json", param.name())),
                    &to_json(&o.summary),
                )?;
                SweepEntry {
                    value: *v,
                    ok: o.failure.is_none(),
                    error: o.failure.clone(),
                    summary: Some(o.summary.clone()),
                }
            }
            Err(e) => SweepEntry {
                value: *v,
                ok: false,
                error: Some(e.to_string()),
                summary: None,
            },
        };
        if !quiet {
            match &entry.summary {
                Some(s) if entry.ok => println!(
                    "{}={}: {} iterations, converged={}, argmin_distance={:?}",
                    param.name(),
                    v,
                    s.iterations,
                    s.converged,
                    s.argmin_distance
                ),
                _ => println!(
                    "{}={}: failed: {}",
                    param.name(),
                    v,
                    entry.error.as_deref().unwrap_or("")
                ),
            }
        }
        entries.push(entry);
    }
    write_atomic(
        &output_dir.join(format!("sweep_{}.csv", param.name())),
        &combined_csv(param, values, &outcomes),
    )?;
    let report = SweepReport {
        param: param.name().into(),
        entries,
    };
    write_atomic(
        &output_dir.join(format!("sweep_{}.json", param.name())),
        &to_json(&report),
    )?;
    Ok(if report.entries.iter().all(|e| e.ok) {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}
