//! Acceptance checks. Each prints one `PASS`/`FAIL` line; run with
//! `cargo test -p geoprox-cli --test acceptance -- --nocapture`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use geoprox::diagnostics::{asymptotic_center, g_concavity_check, g_maximize, GFunction};
use geoprox::oracle::{cosine_mean_argmin, functional_argmin, geodesic_golden_section, resolvent_argmin, GridSpec};
use geoprox::ppa::{existence_certificate, existence_certificate_for, iterated_resolvent_run, MONOTONE_TOL, RATE_TOL};
use geoprox::resolvent::{
    check_fejer_inequality, check_first_inequality, check_resolvent_inequality, resolvent_objective, ResolventSample,
};
use geoprox::sampling::{in_cap, log_uniform, seeded, uniform_sphere};
use geoprox::{
    resolve, run_ppa, ConvexFunctional, InnerSolverConfig, ModelSpace, PpaTrace, RunConfig, SpherePoint, StepSchedule,
};
use geoprox_cli::config::ExperimentConfig;
use geoprox_cli::report::trace_csv;
use geoprox_cli::run::{cmd_run, execute, DEFAULT_CONVERGED_STEP};
use rand::Rng;

const LEMMA_TOL: f64 = 1e-10;
const LEMMA_TRIPLES: usize = 10_000;
const LEMMA_TIME: Duration = Duration::from_secs(5);
const IDENTITY_TOL: f64 = 1e-9;
const RESOLVENT_INEQ_TOL: f64 = 1e-6;
const RESOLVENT_INSTANCES: usize = 1000;
const RESOLVENT_TIME: Duration = Duration::from_secs(120);
const ORACLE_AGREEMENT: f64 = 2e-3;
const ARGMIN_TOL: f64 = 1e-4;
const FEJER_STEP_TOL: f64 = 1e-8;
const KAPPA_TOL: f64 = 1e-8;
const G_TRIALS: usize = 10_000;
const G_SPACING: f64 = 0.01;
const G_AGREEMENT: f64 = 3.0 * G_SPACING;
const SYNTHETIC_STEP_FLOOR: f64 = FRAC_PI_2 - 1e-3;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn polar(theta: f64, az: f64) -> SpherePoint {
    SpherePoint::new(vec![theta.sin() * az.cos(), theta.sin() * az.sin(), theta.cos()]).unwrap()
}

/// A run on a problem with a known minimizer.
struct ReferenceRun {
    name: String,
    u: SpherePoint,
    fu: f64,
    trace: PpaTrace,
}

fn three_anchor_config() -> ExperimentConfig {
    ExperimentConfig::load(&configs_dir().join("three_anchor.toml")).unwrap()
}

fn reference_runs() -> Vec<ReferenceRun> {
    let mut runs = Vec::new();
    let inner = InnerSolverConfig::default();

    let e = three_anchor_config().build().unwrap();
    let u = cosine_mean_argmin(&e.functional).unwrap();
    let fu = e.functional.evaluate(&u, &e.space).unwrap();
    for (name, schedule, n) in [
        ("three-anchor constant", StepSchedule::Constant(1.0), 200),
        ("three-anchor harmonic", StepSchedule::Harmonic, 200),
        ("three-anchor sqrt", StepSchedule::Power(0.5), 400),
    ] {
        let cfg = RunConfig {
            reference_minimizer: Some(u.clone()),
            ..RunConfig::iterations(n)
        };
        let trace = run_ppa(&e.functional, &e.x1, &schedule, &e.space, &cfg, &inner).unwrap();
        runs.push(ReferenceRun {
            name: name.into(),
            u: u.clone(),
            fu,
            trace,
        });
    }

    let s = ModelSpace::sphere(2);
    let anchors = vec![polar(0.3, 0.1), polar(0.28, 2.2), polar(0.32, 4.3)];
    let f = ConvexFunctional::tan_sin_sum(anchors, vec![1.0, 0.5, 2.0], &s).unwrap();
    let grid = GridSpec {
        spacing: 0.01,
        refinement_rounds: 5,
    };
    let (u, fu) = functional_argmin(&f, &s, &grid).unwrap();
    let cfg = RunConfig {
        reference_minimizer: Some(u.clone()),
        reference_tolerance: grid.final_spacing(),
        ..RunConfig::iterations(150)
    };
    let trace = run_ppa(&f, &polar(0.9, 3.0), &StepSchedule::Constant(0.5), &s, &cfg, &inner).unwrap();
    runs.push(ReferenceRun {
        name: "tan-sin sum".into(),
        u,
        fu,
        trace,
    });

    let mut rng = seeded(2024);
    for dim in [2, 3, 4] {
        let s = ModelSpace::sphere(dim);
        let c = uniform_sphere(&mut rng, dim);
        let anchors: Vec<_> = (0..5).map(|_| in_cap(&mut rng, &c, 0.4)).collect();
        let f = ConvexFunctional::cosine_mean(anchors, vec![1.0, 2.0, 0.5, 1.0, 1.5], &s).unwrap();
        let u = cosine_mean_argmin(&f).unwrap();
        let fu = f.evaluate(&u, &s).unwrap();
        let x1 = in_cap(&mut rng, &c, 1.0);
        let cfg = RunConfig {
            reference_minimizer: Some(u.clone()),
            ..RunConfig::iterations(150)
        };
        let trace = run_ppa(&f, &x1, &StepSchedule::Constant(2.0), &s, &cfg, &inner).unwrap();
        runs.push(ReferenceRun {
            name: format!("random cosine mean on S^{dim}"),
            u,
            fu,
            trace,
        });
    }
    runs
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for dim in [2, 4] {
        let s = ModelSpace::sphere(dim);
        let mut rng = seeded(100 + dim as u64);
        for _ in 0..LEMMA_TRIPLES {
            let c = uniform_sphere(&mut rng, dim);
            let x: Vec<_> = (0..3).map(|_| in_cap(&mut rng, &c, 0.999 * FRAC_PI_4)).collect();
            let alpha: f64 = rng.random();
            let r = s.comparison_inequalities(&x[0], &x[1], &x[2], alpha).unwrap();
            worst = worst.min(r.worst_slack());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst >= -LEMMA_TOL && elapsed < LEMMA_TIME,
        format!("worst slack {worst:.3e} on 2x{LEMMA_TRIPLES} triples in {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let s = ModelSpace::sphere(2);
    let mut rng = seeded(2);
    let inner = InnerSolverConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = uniform_sphere(&mut rng, 2);
        let f = ConvexFunctional::constant(rng.random_range(-5.0..5.0));
        for lambda in [0.1, 1.0, 10.0] {
            let r = resolve(&f, lambda, &x, &s, &inner).unwrap();
            worst = worst.max(s.distance(&r.point, &x).unwrap());
        }
    }
    outcome(worst < IDENTITY_TOL, format!("max displacement {worst:.3e}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let s = ModelSpace::sphere(2);
    let mut rng = seeded(3);
    let inner = InnerSolverConfig::default();
    let mut worst = f64::INFINITY;
    for i in 0..RESOLVENT_INSTANCES {
        let c = uniform_sphere(&mut rng, 2);
        let anchors: Vec<_> = (0..3).map(|_| in_cap(&mut rng, &c, 0.3)).collect();
        let f = if i % 2 == 0 {
            ConvexFunctional::cosine_mean(anchors, vec![1.0, 1.0, 1.0], &s).unwrap()
        } else {
            ConvexFunctional::tan_sin_sum(anchors, vec![1.0, 1.0, 1.0], &s).unwrap()
        };
        let x = in_cap(&mut rng, &c, 0.9);
        let y = in_cap(&mut rng, &c, 0.9);
        let (lambda, mu) = (log_uniform(&mut rng, 0.1, 10.0), log_uniform(&mut rng, 0.1, 10.0));
        let rx = resolve(&f, lambda, &x, &s, &inner).unwrap();
        let ry = resolve(&f, mu, &y, &s, &inner).unwrap();
        let rxm = resolve(&f, mu, &x, &s, &inner).unwrap();
        let sx = ResolventSample {
            eta: lambda,
            z: &x,
            result: &rx,
        };
        let sy = ResolventSample {
            eta: mu,
            z: &y,
            result: &ry,
        };
        let sxm = ResolventSample {
            eta: mu,
            z: &x,
            result: &rxm,
        };
        worst = worst
            .min(check_first_inequality(&f, sx, sy, &s).unwrap().slack)
            .min(check_first_inequality(&f, sy, sx, &s).unwrap().slack)
            .min(check_resolvent_inequality(sx, sy, &s).unwrap().slack)
            .min(check_resolvent_inequality(sxm, sy, &s).unwrap().slack);
        if let Some(u) = cosine_mean_argmin(&f) {
            worst = worst.min(check_fejer_inequality(&f, sx, &u, &s).unwrap().worst_slack());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst >= -RESOLVENT_INEQ_TOL && elapsed < RESOLVENT_TIME,
        format!("worst slack {worst:.3e} on {RESOLVENT_INSTANCES} instances in {elapsed:.2?}"),
    )
}

fn criterion_4() -> Outcome {
    let s = ModelSpace::sphere(2);
    let mut rng = seeded(4);
    let inner = InnerSolverConfig::default();
    let grid = GridSpec::default();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let a = uniform_sphere(&mut rng, 2);
        let x = in_cap(&mut rng, &a, 1.2);
        let lambda = log_uniform(&mut rng, 0.1, 10.0);
        let f = if i % 2 == 0 {
            ConvexFunctional::cosine_mean(vec![a.clone()], vec![1.0], &s).unwrap()
        } else {
            ConvexFunctional::tan_sin_sum(vec![a.clone()], vec![1.0], &s).unwrap()
        };
        let descent = resolve(&f, lambda, &x, &s, &inner).unwrap().point;
        let length = s.distance(&x, &a).unwrap();
        let golden = if length < 1e-12 {
            x.clone()
        } else {
            let g = s.geodesic(&x, &a).unwrap();
            let (t, _) = geodesic_golden_section(
                |t| resolvent_objective(&f, lambda, &x, &g.at(t).unwrap(), &s).unwrap_or(f64::INFINITY),
                length,
                1e-10,
            );
            g.at(t).unwrap()
        };
        let (gridded, _) = resolvent_argmin(&f, lambda, &x, &s, &grid).unwrap();
        worst = worst
            .max(descent.angle(&golden))
            .max(descent.angle(&gridded))
            .max(golden.angle(&gridded));
    }
    outcome(
        worst <= ORACLE_AGREEMENT,
        format!("max pairwise disagreement {worst:.3e} over 50 problems"),
    )
}

fn criterion_5() -> Outcome {
    let outcome_run = execute(&three_anchor_config()).unwrap();
    let trace = &outcome_run.trace;
    let e = three_anchor_config().build().unwrap();
    let grid = GridSpec {
        spacing: e.grid.spacing,
        refinement_rounds: 4,
    };
    let (u, _) = functional_argmin(&e.functional, &e.space, &grid).unwrap();
    let dist = trace.final_point().angle(&u);
    let monotone = trace.objective_monotone(MONOTONE_TOL);
    let exact = cosine_mean_argmin(&e.functional).unwrap();
    let mut fejer_worst = f64::NEG_INFINITY;
    for w in trace.iterates.windows(2) {
        fejer_worst = fejer_worst.max(exact.angle(&w[1]) - exact.angle(&w[0]));
    }
    let fejer_ok = fejer_worst <= FEJER_STEP_TOL;
    outcome(
        trace.steps() == 200 && dist < ARGMIN_TOL && monotone && fejer_ok,
        format!(
            "{} steps, distance to grid argmin {dist:.3e}, monotone {monotone}, worst Fejer increase {fejer_worst:.3e}",
            trace.steps()
        ),
    )
}

fn criterion_6(runs: &[ReferenceRun]) -> Outcome {
    let mut failed = Vec::new();
    for r in runs {
        let t = &r.trace;
        let k_expected = 1.0 / t.step_distances.iter().copied().fold(0.0, f64::max).cos().powi(2) + 1.0;
        let k_ok = t.space.kappa() != 1.0 || (t.k_constant() - k_expected).abs() < 1e-12;
        if !k_ok || !t.rate_certified(&r.u, r.fu, RATE_TOL).unwrap() {
            failed.push(r.name.clone());
        }
    }
    outcome(
        failed.is_empty(),
        format!("{} runs certified; failing: {failed:?}", runs.len() - failed.len()),
    )
}

fn criterion_7() -> Outcome {
    let e = three_anchor_config().build().unwrap();
    let u = cosine_mean_argmin(&e.functional).unwrap();
    let fu = e.functional.evaluate(&u, &e.space).unwrap();
    let cfg = RunConfig {
        reference_minimizer: Some(u.clone()),
        ..RunConfig::iterations(200)
    };
    let trace = iterated_resolvent_run(&e.functional, &e.x1, 200, &e.space, &cfg, &e.inner).unwrap();
    let scale = trace.c_constant() * (1.0 - e.space.distance(&u, &e.x1).unwrap().cos());
    let mut worst = f64::INFINITY;
    for (k, gap) in trace.gaps(fu).into_iter().enumerate() {
        worst = worst.min(scale / (k + 1) as f64 - gap);
    }
    outcome(
        trace.steps() == 200 && worst >= -RATE_TOL,
        format!(
            "worst slack {worst:.3e} over {} steps, C = {:.6}",
            trace.steps(),
            trace.c_constant()
        ),
    )
}

fn criterion_8() -> Outcome {
    let s1 = ModelSpace::sphere(2);
    let s4 = ModelSpace::new(2, 4.0).unwrap();
    let anchors = vec![polar(0.3, 0.1), polar(0.28, 2.2), polar(0.32, 4.3)];
    let inner = InnerSolverConfig::default();
    let cfg = RunConfig::iterations(100);
    let x1 = polar(1.0, 0.7);
    let mut worst: f64 = 0.0;
    for tan_sin in [false, true] {
        let build = |s: &ModelSpace| {
            if tan_sin {
                ConvexFunctional::tan_sin_sum(anchors.clone(), vec![1.0, 1.0, 1.0], s).unwrap()
            } else {
                ConvexFunctional::cosine_mean(anchors.clone(), vec![1.0, 1.0, 1.0], s).unwrap()
            }
        };
        let a = run_ppa(&build(&s1), &x1, &StepSchedule::Constant(1.0), &s1, &cfg, &inner).unwrap();
        let b = run_ppa(&build(&s4), &x1, &StepSchedule::Constant(1.0), &s4, &cfg, &inner).unwrap();
        if a.steps() != 100 || b.steps() != 100 {
            return outcome(false, "runs stopped early".into());
        }
        for (x, y) in a.iterates.iter().zip(&b.iterates) {
            worst = worst.max(x.angle(y));
        }
    }
    outcome(
        worst < KAPPA_TOL,
        format!("max iterate disagreement {worst:.3e} over 100 steps"),
    )
}

fn criterion_9(runs: &[ReferenceRun]) -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    let converged = runs.iter().filter(|r| r.trace.space.dim() == 2).filter(|r| {
        r.trace
            .step_distances
            .last()
            .is_some_and(|d| *d < DEFAULT_CONVERGED_STEP)
    });
    for r in converged {
        let s = &r.trace.space;
        let gf = GFunction::from_trace(&r.trace).unwrap();
        let report = g_concavity_check(&gf, s, G_TRIALS, 9).unwrap();
        let gmax = g_maximize(&gf, s, G_SPACING).unwrap();
        let center = asymptotic_center(&r.trace.iterates, s, G_SPACING).unwrap().center;
        let spread = gmax.angle(&center).max(gmax.angle(&r.u)).max(center.angle(&r.u));
        passed &= report.passed && spread <= G_AGREEMENT;
        details.push(format!(
            "{}: slack {:.1e}/{:.1e}, spread {spread:.1e}",
            r.name, report.concavity_worst_slack, report.lipschitz_worst_slack
        ));
    }
    outcome(passed, details.join("; "))
}

fn criterion_10(runs: &[ReferenceRun]) -> Outcome {
    let all_true = runs.iter().all(|r| existence_certificate(&r.trace).unwrap().verdict);
    let s = ModelSpace::sphere(2);
    let pole = polar(0.0, 0.0);
    let mut synthetic_false = true;
    let mut smallest_step = f64::INFINITY;
    for angle in [FRAC_PI_2 - 1e-7, FRAC_PI_2, FRAC_PI_2 + 0.1] {
        let far = polar(angle, 0.4);
        let hopping: Vec<_> = (0..60)
            .map(|k| if k % 2 == 0 { pole.clone() } else { far.clone() })
            .collect();
        let c = existence_certificate_for(&hopping, &s).unwrap();
        smallest_step = smallest_step.min(c.sup_step);
        synthetic_false &= !c.verdict;
    }
    outcome(
        all_true && synthetic_false && smallest_step >= SYNTHETIC_STEP_FLOOR,
        format!(
            "{} runs certified: {all_true}; oscillating traces (steps >= {smallest_step:.7}) rejected: {synthetic_false}",
            runs.len()
        ),
    )
}

fn criterion_11() -> Outcome {
    let cfg = three_anchor_config();
    let a = trace_csv(&execute(&cfg).unwrap().trace);
    let b = trace_csv(&execute(&cfg).unwrap().trace);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        assert_eq!(
            cmd_run(&configs_dir().join("three_anchor.toml"), d.path(), true).unwrap(),
            0
        );
    }
    let files: Vec<Vec<u8>> = dirs
        .iter()
        .map(|d| std::fs::read(d.path().join(&cfg.outputs.trace_path)).unwrap())
        .collect();
    let identical = a == b && files[0] == files[1] && files[0] == a.as_bytes();
    outcome(
        identical,
        format!("{} bytes, identical across 4 runs: {identical}", a.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let runs = reference_runs();
    let results = [
        ("geometry lemmas", criterion_1()),
        ("constant resolvent is identity", criterion_2()),
        ("resolvent inequalities", criterion_3()),
        ("oracle equivalence", criterion_4()),
        ("ppa convergence", criterion_5()),
        ("rate certification", criterion_6(&runs)),
        ("iterated resolvent", criterion_7()),
        ("curvature equivalence", criterion_8()),
        ("g-function machinery", criterion_9(&runs)),
        ("existence certificate", criterion_10(&runs)),
        ("reproducibility", criterion_11()),
    ];
    let mut failures = 0;
    println!();
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failures += usize::from(!o.passed);
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
