//! `verify`: seeded randomized property suites with a JSON report.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::Path;

use geoprox::diagnostics::{
    asymptotic_center, g_concavity_check, g_evaluate, g_maximize, monotone_limit_check, GFunction, MonotoneMap,
    G_CHECK_TOL,
};
use geoprox::functionals::{penalty, sampling_cap, CONVEXITY_TOL};
use geoprox::oracle::cosine_mean_argmin;
use geoprox::ppa::{existence_certificate, rate_bound, FEJER_TOL, MONOTONE_TOL, RATE_TOL};
use geoprox::resolvent::{
    check_fejer_inequality, check_first_inequality, check_resolvent_inequality, stationarity_defect, ResolventSample,
    INEQUALITY_TOL,
};
use geoprox::sampling::{in_cap, log_uniform, seeded, uniform_sphere, SeededRng};
use geoprox::{resolve, run_ppa, ConvexFunctional, InnerSolverConfig, ModelSpace, RunConfig, StepSchedule};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, EXIT_FAILED, EXIT_OK};
use crate::report::{to_json, write_atomic};

/// Tolerance on the spherical comparison inequalities.
pub const GEOMETRY_TOL: f64 = 1e-10;
/// Grid spacing used by the diagnostics suite.
pub const DIAGNOSTICS_SPACING: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Geometry,
    Functionals,
    Resolvent,
    Ppa,
    Diagnostics,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Geometry => "geometry",
            Self::Functionals => "functionals",
            Self::Resolvent => "resolvent",
            Self::Ppa => "ppa",
            Self::Diagnostics => "diagnostics",
            Self::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub suite: String,
    pub name: String,
    pub trials: usize,
    /// Smallest `lhs - rhs` observed; the property passes when it is at least `-tolerance`.
    pub worst_slack: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

/// One observation: property name, slack, tolerance.
type Obs = (&'static str, f64, f64);

fn trial_rng(seed: u64, suite: Suite, i: usize) -> SeededRng {
    let salt = suite as u64 + 1;
    seeded(seed ^ salt.wrapping_mul(0xA24B_AED4_963E_E407) ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs `trial` for every index in parallel and folds the observations per
/// property, in first-seen order.
fn aggregate(
    suite: Suite,
    trials: usize,
    seed: u64,
    trial: impl Fn(&mut SeededRng, usize) -> geoprox::Result<Vec<Obs>> + Sync,
) -> Vec<PropertyResult> {
    let per_trial: Vec<Vec<Obs>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, suite, i);
            trial(&mut rng, i).unwrap_or_else(|_| vec![("evaluation_succeeds", f64::MIN, 0.0)])
        })
        .collect();
    let mut out: Vec<PropertyResult> = Vec::new();
    for obs in per_trial {
        for (name, slack, tol) in obs {
            let slack = if slack.is_nan() { f64::MIN } else { slack };
            match out.iter_mut().find(|p| p.name == name) {
                Some(p) => {
                    p.trials += 1;
                    p.worst_slack = p.worst_slack.min(slack);
                }
                None => out.push(PropertyResult {
                    suite: suite.name().into(),
                    name: name.into(),
                    trials: 1,
                    worst_slack: slack,
                    tolerance: tol,
                    passed: false,
                }),
            }
        }
    }
    for p in &mut out {
        p.passed = p.worst_slack >= -p.tolerance;
    }
    out
}

fn random_dim(rng: &mut SeededRng) -> usize {
    rng.random_range(2..=4)
}

fn anchors_near(
    rng: &mut SeededRng,
    center: &geoprox::SpherePoint,
    count: usize,
    radius: f64,
) -> Vec<geoprox::SpherePoint> {
    (0..count).map(|_| in_cap(rng, center, radius)).collect()
}

fn geometry_trial(rng: &mut SeededRng, _: usize) -> geoprox::Result<Vec<Obs>> {
    let mut obs = Vec::new();
    for (dim, tags) in [
        (2, ["sine_weighted_s2", "midpoint_s2", "cosine_convexity_s2"]),
        (4, ["sine_weighted_s4", "midpoint_s4", "cosine_convexity_s4"]),
    ] {
        let s = ModelSpace::sphere(dim);
        let c = uniform_sphere(rng, dim);
        let p = anchors_near(rng, &c, 3, FRAC_PI_4 * 0.999);
        let alpha: f64 = rng.random();
        let r = s.comparison_inequalities(&p[0], &p[1], &p[2], alpha)?;
        obs.push((tags[0], r.sine_weighted.slack, GEOMETRY_TOL));
        obs.push((tags[1], r.midpoint.slack, GEOMETRY_TOL));
        if let Some(cc) = r.cosine_convexity {
            obs.push((tags[2], cc.slack, GEOMETRY_TOL));
        }
    }
    let dim = random_dim(rng);
    let s = ModelSpace::new(dim, log_uniform(rng, 0.25, 4.0))?;
    let (x, y, z) = (
        uniform_sphere(rng, dim),
        uniform_sphere(rng, dim),
        uniform_sphere(rng, dim),
    );
    obs.push((
        "triangle_inequality",
        s.distance(&x, &z)? + s.distance(&z, &y)? - s.distance(&x, &y)?,
        GEOMETRY_TOL,
    ));
    let y = in_cap(rng, &x, 3.0);
    if x.angle(&y) > 1e-9 {
        let len = s.distance(&x, &y)?;
        let t = rng.random::<f64>() * len;
        let m = s.geodesic_point(&x, &y, t)?;
        let err = (s.distance(&x, &m)? - t)
            .abs()
            .max((s.distance(&m, &y)? - (len - t)).abs());
        obs.push(("geodesic_consistency", -err, GEOMETRY_TOL));
    }
    Ok(obs)
}

fn functionals_trial(rng: &mut SeededRng, _: usize) -> geoprox::Result<Vec<Obs>> {
    let dim = random_dim(rng);
    let s = ModelSpace::sphere(dim);
    let c = uniform_sphere(rng, dim);
    let anchors = anchors_near(rng, &c, 3, 0.4);
    let weights: Vec<f64> = (0..3).map(|_| log_uniform(rng, 0.1, 10.0)).collect();
    let mut obs = Vec::new();
    for (name, f) in [
        (
            "convexity_cosine_mean",
            ConvexFunctional::cosine_mean(anchors.clone(), weights.clone(), &s)?,
        ),
        (
            "convexity_tan_sin_sum",
            ConvexFunctional::tan_sin_sum(anchors.clone(), weights.clone(), &s)?,
        ),
        (
            "convexity_max_cosine",
            ConvexFunctional::max_cosine(anchors.clone(), weights.clone(), &s)?,
        ),
    ] {
        let (center, radius) = sampling_cap(&f, &c);
        let x = in_cap(rng, &center, radius);
        let y = in_cap(rng, &center, radius);
        let alpha: f64 = rng.random();
        let z = if x.angle(&y) < 1e-15 {
            x.clone()
        } else {
            s.convex_combination(&x, &y, alpha)?
        };
        let slack = alpha * f.evaluate(&x, &s)? + (1.0 - alpha) * f.evaluate(&y, &s)? - f.evaluate(&z, &s)?;
        obs.push((name, slack, CONVEXITY_TOL));
    }
    let (a, b): (f64, f64) = (rng.random_range(0.0..1.5), rng.random_range(0.0..1.5));
    let (lo, hi) = (a.min(b), a.max(b));
    let w: f64 = rng.random();
    obs.push(("penalty_increasing", penalty(hi)? - penalty(lo)?, 0.0));
    obs.push((
        "penalty_convex",
        w * penalty(lo)? + (1.0 - w) * penalty(hi)? - penalty(w * lo + (1.0 - w) * hi)?,
        CONVEXITY_TOL,
    ));
    Ok(obs)
}

fn resolvent_trial(rng: &mut SeededRng, i: usize) -> geoprox::Result<Vec<Obs>> {
    let s = ModelSpace::sphere(2);
    let c = uniform_sphere(rng, 2);
    let anchors = anchors_near(rng, &c, 3, 0.3);
    let f = if i.is_multiple_of(2) {
        ConvexFunctional::cosine_mean(anchors, vec![1.0, 1.0, 1.0], &s)?
    } else {
        ConvexFunctional::tan_sin_sum(anchors, vec![1.0, 1.0, 1.0], &s)?
    };
    let (lambda, mu) = (log_uniform(rng, 0.1, 10.0), log_uniform(rng, 0.1, 10.0));
    let x = in_cap(rng, &c, 0.9);
    let y = in_cap(rng, &c, 0.9);
    let cfg = InnerSolverConfig::default();
    let rx = resolve(&f, lambda, &x, &s, &cfg)?;
    let ry = resolve(&f, mu, &y, &s, &cfg)?;
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
    let mut obs = vec![
        (
            "first_inequality",
            check_first_inequality(&f, sx, sy, &s)?.slack,
            INEQUALITY_TOL,
        ),
        (
            "first_inequality_swapped",
            check_first_inequality(&f, sy, sx, &s)?.slack,
            INEQUALITY_TOL,
        ),
        (
            "two_resolvent_inequality",
            check_resolvent_inequality(sx, sy, &s)?.slack,
            INEQUALITY_TOL,
        ),
        ("boundary_repulsion", rx.c_value, 0.0),
        (
            "objective_decrease",
            f.evaluate(&x, &s)? - f.evaluate(&rx.point, &s)?,
            1e-12,
        ),
        (
            "stationarity",
            stationarity_defect(&f, lambda, &x, &rx.point, &s, cfg.fd_step, 8)? / rx.objective.abs().max(1.0),
            10.0 * cfg.tol + fd_noise(cfg.fd_step),
        ),
    ];
    if let Some(u) = cosine_mean_argmin(&f) {
        let r = check_fejer_inequality(&f, sx, &u, &s)?;
        obs.push(("fejer_rate_inequality", r.rate.slack, INEQUALITY_TOL));
        obs.push(("fejer_contraction", r.contraction.slack, INEQUALITY_TOL));
        obs.push(("fejer_consequence", r.consequence.slack, INEQUALITY_TOL));
    }
    let rc = resolve(&ConvexFunctional::constant(rng.random()), lambda, &x, &s, &cfg)?;
    obs.push(("constant_is_identity", -s.distance(&rc.point, &x)?, 1e-9));
    Ok(obs)
}

/// Rounding floor of a central difference of an objective of unit size.
fn fd_noise(fd_step: f64) -> f64 {
    8.0 * f64::EPSILON / fd_step
}

fn ppa_trial(rng: &mut SeededRng, _: usize) -> geoprox::Result<Vec<Obs>> {
    let dim = random_dim(rng);
    let s = ModelSpace::sphere(dim);
    let c = uniform_sphere(rng, dim);
    let anchors = anchors_near(rng, &c, 3, 0.4);
    let weights: Vec<f64> = (0..3).map(|_| log_uniform(rng, 0.2, 5.0)).collect();
    let f = ConvexFunctional::cosine_mean(anchors, weights, &s)?;
    let u = cosine_mean_argmin(&f).expect("cosine_mean has a closed-form minimizer");
    let x1 = in_cap(rng, &c, FRAC_PI_2 - 0.45);
    let lambda = log_uniform(rng, 0.2, 5.0);
    let cfg = RunConfig {
        reference_minimizer: Some(u.clone()),
        ..RunConfig::iterations(30)
    };
    let t = run_ppa(
        &f,
        &x1,
        &StepSchedule::Constant(lambda),
        &s,
        &cfg,
        &InnerSolverConfig::default(),
    )?;
    let fu = f.evaluate(&u, &s)?;
    let mut monotone = f64::INFINITY;
    for w in t.f_values.windows(2) {
        monotone = monotone.min(w[0] - w[1]);
    }
    let d: Vec<f64> = t
        .iterates
        .iter()
        .map(|x| s.distance(&u, x))
        .collect::<geoprox::Result<_>>()?;
    let fejer = d.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let mut rate = f64::INFINITY;
    for (k, gap) in t.gaps(fu).into_iter().enumerate() {
        rate = rate.min(rate_bound(&t, &u, k + 1)? - gap);
    }
    let cert = existence_certificate(&t)?;
    Ok(vec![
        ("objective_monotone", monotone, MONOTONE_TOL),
        ("fejer_monotone", fejer, FEJER_TOL),
        ("rate_certified", rate, RATE_TOL),
        ("steps_below_half_pi", FRAC_PI_2 - t.sup_step_overall(), 0.0),
        ("existence_verdict", if cert.verdict { 1.0 } else { -1.0 }, 0.0),
    ])
}

fn diagnostics_suite(trials: usize, seed: u64) -> geoprox::Result<Vec<PropertyResult>> {
    let suite = Suite::Diagnostics;
    let mut rng = trial_rng(seed, suite, usize::MAX);
    let s = ModelSpace::sphere(2);
    let c = uniform_sphere(&mut rng, 2);
    let anchors = anchors_near(&mut rng, &c, 3, 0.3);
    let f = ConvexFunctional::cosine_mean(anchors, vec![1.0, 1.0, 1.0], &s)?;
    let u = cosine_mean_argmin(&f).expect("cosine_mean has a closed-form minimizer");
    let x1 = in_cap(&mut rng, &u, 0.8);
    let trace = run_ppa(
        &f,
        &x1,
        &StepSchedule::Constant(1.0),
        &s,
        &RunConfig::iterations(100),
        &InnerSolverConfig::default(),
    )?;
    let gf = GFunction::from_trace(&trace)?;

    let conc = g_concavity_check(&gf, &s, trials, seed)?;
    let gmax = g_maximize(&gf, &s, DIAGNOSTICS_SPACING)?;
    let center = asymptotic_center(&trace.iterates, &s, DIAGNOSTICS_SPACING)?;
    let agree = 3.0 * DIAGNOSTICS_SPACING;
    let single = |name: &str, slack: f64, tol: f64| PropertyResult {
        suite: suite.name().into(),
        name: name.into(),
        trials: 1,
        worst_slack: slack,
        tolerance: tol,
        passed: slack >= -tol,
    };
    let mut out = vec![
        PropertyResult {
            trials,
            ..single("g_concave", conc.concavity_worst_slack, G_CHECK_TOL)
        },
        PropertyResult {
            trials,
            ..single("g_nonexpansive", conc.lipschitz_worst_slack, G_CHECK_TOL)
        },
        single("g_maximizer_near_argmin", agree - gmax.angle(&u), 0.0),
        single("asymptotic_center_near_argmin", agree - center.center.angle(&u), 0.0),
        single("g_maximizer_near_center", agree - gmax.angle(&center.center), 0.0),
        single(
            "g_limit_beats_start",
            g_evaluate(&gf, trace.final_point(), &s)? - g_evaluate(&gf, &x1, &s)?,
            0.0,
        ),
    ];
    let gf_ref = &gf;
    out.extend(aggregate(suite, trials, seed, move |rng, _| {
        let y = in_cap(rng, &c, 0.4);
        let g = g_evaluate(gf_ref, &y, &s)?;
        let len = rng.random_range(8..64);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..FRAC_PI_2)).collect();
        let cos = monotone_limit_check(&values, MonotoneMap::Cosine);
        let id = monotone_limit_check(&values, MonotoneMap::Identity);
        Ok(vec![
            ("g_in_unit_interval", g.min(1.0 - g), 0.0),
            ("monotone_limit_cosine", -(cos.lhs - cos.rhs).abs(), 1e-9),
            ("monotone_limit_identity", -(id.lhs - id.rhs).abs(), 1e-9),
        ])
    }));
    Ok(out)
}

/// Runs one suite (or all of them).
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<VerifyReport, CliError> {
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let suites: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Geometry,
            Suite::Functionals,
            Suite::Resolvent,
            Suite::Ppa,
            Suite::Diagnostics,
        ],
        one => vec![one],
    };
    let mut properties = Vec::new();
    for s in suites {
        let results = match s {
            Suite::Geometry => aggregate(s, trials, seed, geometry_trial),
            Suite::Functionals => aggregate(s, trials, seed, functionals_trial),
            Suite::Resolvent => aggregate(s, trials, seed, resolvent_trial),
            Suite::Ppa => aggregate(s, trials, seed, ppa_trial),
            Suite::Diagnostics => diagnostics_suite(trials, seed).unwrap_or_else(|e| {
                vec![PropertyResult {
                    suite: s.name().into(),
                    name: format!("evaluation_succeeds: {e}"),
                    trials: 1,
                    worst_slack: f64::MIN,
                    tolerance: 0.0,
                    passed: false,
                }]
            }),
            Suite::All => unreachable!("expanded above"),
        };
        properties.extend(results);
    }
    Ok(VerifyReport {
        suite: suite.name().into(),
        trials,
        seed,
        passed: properties.iter().all(|p| p.passed),
        properties,
    })
}

/// `geoprox verify <suite>`; writes `verify_<suite>.json` into `output_dir`.
pub fn cmd_verify(suite: Suite, trials: usize, seed: u64, output_dir: &Path, quiet: bool) -> Result<i32, CliError> {
    let report = run_suite(suite, trials, seed)?;
    let path = output_dir.join(format!("verify_{}.json", suite.name()));
    write_atomic(&path, &to_json(&report))?;
    if !quiet {
        for p in &report.properties {
            println!(
                "{} {}/{}: worst slack {:.3e} over {} trials",
                if p.passed { "PASS" } else { "FAIL" },
                p.suite,
                p.name,
                p.worst_slack,
                p.trials
            );
        }
        println!("report: {}", path.display());
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
}
