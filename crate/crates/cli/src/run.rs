//! `run`: one proximal point experiment.

use std::path::{Path, PathBuf};
use std::time::Instant;

use geoprox::oracle::{cosine_mean_argmin, functional_argmin};
use geoprox::ppa::RATE_TOL;
use geoprox::{run_ppa, FunctionalKind, PpaTrace, SpherePoint, StopReason};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, EXIT_OK, EXIT_SOLVER};
use crate::report::{to_json, trace_csv, write_atomic, RunSummary};

/// Final step length below which a run without a step tolerance counts as converged.
pub const DEFAULT_CONVERGED_STEP: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: PpaTrace,
    pub summary: RunSummary,
    /// Present when the run stopped on a solver failure; `trace` is then partial.
    pub failure: Option<String>,
}

/// Reference minimizer and its accuracy: closed form for `cosine_mean`, the
/// starting point for a constant functional, the grid oracle on `S^2`.
pub fn reference_minimizer(e: &Experiment) -> Result<Option<(SpherePoint, f64)>, CliError> {
    let f = &e.functional;
    if f.kind() == FunctionalKind::Constant {
        return Ok(Some((e.x1.clone(), 0.0)));
    }
    if let Some(u) = cosine_mean_argmin(f) {
        return Ok(Some((u, 0.0)));
    }
    if e.space.dim() == 2 && !f.anchors().is_empty() {
        let (u, _) = functional_argmin(f, &e.space, &e.grid)?;
        return Ok(Some((u, e.grid.final_spacing())));
    }
    Ok(None)
}

/// Runs the experiment. Configuration problems are returned as errors before
/// anything runs; a solver failure yields an outcome carrying the partial trace.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let mut e = cfg.build()?;
    let reference = reference_minimizer(&e)?;
    if cfg.run.stop_gap_tol.is_some() && reference.is_none() {
        return Err(CliError::Config(
            "stop_gap_tol needs a reference minimizer, which is unavailable for this problem".into(),
        ));
    }
    if let Some((u, tol)) = &reference {
        e.run.reference_minimizer = Some(u.clone());
        e.run.reference_tolerance = *tol;
        e.run.stop_gap_tol = cfg.run.stop_gap_tol;
    }
    let start = Instant::now();
    let (trace, failure) = match run_ppa(&e.functional, &e.x1, &e.schedule, &e.space, &e.run, &e.inner) {
        Ok(t) => (t, None),
        Err(geoprox::Error::RunFailed { step, source, partial }) => {
            (*partial, Some(format!("proximal step {step} failed: {source}")))
        }
        Err(other) => return Err(other.into()),
    };
    let wall_time_ms = start.elapsed().as_millis() as u64;
    let summary = summarize(&e, &trace, failure.clone(), wall_time_ms)?;
    Ok(RunOutcome {
        trace,
        summary,
        failure,
    })
}

fn summarize(
    e: &Experiment,
    trace: &PpaTrace,
    failure: Option<String>,
    wall_time_ms: u64,
) -> Result<RunSummary, CliError> {
    let f = &e.functional;
    let last = trace.final_point();
    let (final_gap, argmin_distance, rate_ok, fejer_ok) = match &trace.reference {
        Some(u) => {
            let fu = f.evaluate(u, &e.space)?;
            let rate_ok = trace.steps() > 0 && trace.rate_certified(u, fu, RATE_TOL)?;
            (
                Some(f.evaluate(last, &e.space)? - fu),
                Some(e.space.distance(u, last)?),
                rate_ok,
                trace.steps() > 0 && trace.fejer_flags.iter().all(|ok| *ok),
            )
        }
        None => (None, None, false, false),
    };
    let step_tol = e.run.stop_step_tol.unwrap_or(DEFAULT_CONVERGED_STEP);
    let converged = failure.is_none()
        && (trace.stop_reason != StopReason::MaxIterations
            || trace.step_distances.last().is_some_and(|d| *d < step_tol));
    Ok(RunSummary {
        converged,
        iterations: trace.steps(),
        final_gap,
        sup_step: trace.sup_step_overall(),
        k: trace.k_constant(),
        c: trace.c_constant(),
        rate_bound_satisfied: rate_ok,
        fejer_satisfied: fejer_ok,
        argmin_distance,
        wall_time_ms,
        reference_available: trace.reference.is_some(),
        stop_reason: if failure.is_some() {
            "solver_failure".into()
        } else {
            trace.stop_reason.name().into()
        },
        error: failure,
    })
}

/// Resolves a configured output path against `output_dir`.
pub fn output_path(output_dir: &Path, configured: &Path) -> PathBuf {
    if configured.is_absolute() {
        configured.to_path_buf()
    } else {
        output_dir.join(configured)
    }
}

pub fn write_outcome(outcome: &RunOutcome, trace_path: &Path, summary_path: &Path) -> Result<(), CliError> {
    write_atomic(trace_path, &trace_csv(&outcome.trace))?;
    write_atomic(summary_path, &to_json(&outcome.summary))
}

/// `geoprox run <config>`.
pub fn cmd_run(config_path: &Path, output_dir: &Path, quiet: bool) -> Result<i32, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let outcome = execute(&cfg)?;
    let trace_path = output_path(output_dir, &cfg.outputs.trace_path);
    let summary_path = output_path(output_dir, &cfg.outputs.summary_path);
    write_outcome(&outcome, &trace_path, &summary_path)?;
    if let Some(msg) = &outcome.failure {
        eprintln!("error: {msg}");
        return Ok(EXIT_SOLVER);
    }
    if !quiet {
        let s = &outcome.summary;
        println!(
            "{} iterations ({}), converged={}, sup_step={:.6e}, rate_bound_satisfied={}, fejer_satisfied={}",
            s.iterations, s.stop_reason, s.converged, s.sup_step, s.rate_bound_satisfied, s.fejer_satisfied
        );
        println!("trace: {}", trace_path.display());
        println!("summary: {}", summary_path.display());
    }
    Ok(EXIT_OK)
}
