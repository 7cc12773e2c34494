//! The proximal point iteration `x_{n+1} = R_{lambda_n f} x_n` and the
//! certificates computed from its trace.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::functionals::ConvexFunctional;
use crate::geometry::{ModelSpace, SpherePoint};
use crate::resolvent::{resolve, InnerSolverConfig};

/// Slack on `f(x_{n+1}) <= f(x_n)`.
pub const MONOTONE_TOL: f64 = 1e-8;
/// Slack on `d(u, x_{n+1}) <= d(u, x_n)`.
pub const FEJER_TOL: f64 = 1e-8;
/// Slack on the convergence-rate certificate.
pub const RATE_TOL: f64 = 1e-8;
/// Margin below `pi/2` required by the existence certificate.
pub const EXISTENCE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// `lambda_n = value`.
    Constant(f64),
    /// `lambda_n = 1 / n`.
    Harmonic,
    /// `lambda_n = n^(-p)`, `0 < p <= 1`.
    Power(f64),
    /// Explicit steps; the last one repeats once the list is exhausted. The
    /// flag records the caller's claim that the full sequence sums to infinity.
    ExplicitList { steps: Vec<f64>, asserted_divergent: bool },
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(v) if !(*v > 0.0 && v.is_finite()) => {
                Err(Error::InvalidConfig(format!("constant step must be positive, got {v}")))
            }
            Self::Power(p) if !(*p > 0.0 && *p <= 1.0) => Err(Error::InvalidConfig(format!(
                "power exponent must lie in (0, 1], got {p}"
            ))),
            Self::ExplicitList {
                steps,
                asserted_divergent,
            } => {
                if steps.is_empty() {
                    return Err(Error::InvalidConfig("explicit step list is empty".into()));
                }
                if let Some(v) = steps.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::InvalidConfig(format!("step {v} is not positive")));
                }
                if !asserted_divergent {
                    return Err(Error::InvalidConfig(
                        "explicit step list must assert that its sum diverges".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `lambda_n` for `n >= 1`.
    pub fn lambda(&self, n: usize) -> f64 {
        let n = n.max(1);
        match self {
            Self::Constant(v) => *v,
            Self::Harmonic => 1.0 / n as f64,
            Self::Power(p) => (n as f64).powf(-p),
            Self::ExplicitList { steps, .. } => steps[(n - 1).min(steps.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub max_iterations: usize,
    /// Halt once `d(x_{n+1}, x_n)` drops below this.
    pub stop_step_tol: Option<f64>,
    /// Halt once `f(x_{n+1}) - f(u)` drops below this; needs a reference minimizer.
    pub stop_gap_tol: Option<f64>,
    pub reference_minimizer: Option<SpherePoint>,
    /// Known accuracy of the reference minimizer; widens the Fejer slack by twice this.
    pub reference_tolerance: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn iterations(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        for (name, tol) in [
            ("stop_step_tol", self.stop_step_tol),
            ("stop_gap_tol", self.stop_gap_tol),
        ] {
            if let Some(t) = tol {
                if t.is_nan() || t <= 0.0 {
                    return Err(Error::InvalidConfig(format!("{name} must be positive, got {t}")));
                }
            }
        }
        if self.stop_gap_tol.is_some() && self.reference_minimizer.is_none() {
            return Err(Error::InvalidConfig(
                "stop_gap_tol requires a reference minimizer".into(),
            ));
        }
        if self.reference_tolerance.is_nan() || self.reference_tolerance < 0.0 {
            return Err(Error::InvalidConfig("reference_tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    StepTolerance,
    GapTolerance,
}

impl StopReason {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MaxIterations => "max_iterations",
            Self::StepTolerance => "step_tolerance",
            Self::GapTolerance => "gap_tolerance",
        }
    }
}

/// Record of a proximal point run. Index `k` of the per-step vectors refers
/// to the step `x_{k+1} -> x_{k+2}` (zero-based), i.e. to `n = k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PpaTrace {
    pub space: ModelSpace,
    /// `x_1, ..., x_{N+1}`.
    pub iterates: Vec<SpherePoint>,
    pub lambdas: Vec<f64>,
    /// `f(x_1), ..., f(x_{N+1})`.
    pub f_values: Vec<f64>,
    /// `d(x_{n+1}, x_n)` in the metric of `space`.
    pub step_distances: Vec<f64>,
    /// Running maximum of `step_distances`.
    pub sup_step: Vec<f64>,
    /// `C_n = cos(sqrt(kappa) d(x_{n+1}, x_n))`.
    pub c_values: Vec<f64>,
    pub reference: Option<SpherePoint>,
    /// Rate bound per step; empty without a reference minimizer.
    pub rate_bounds: Vec<f64>,
    /// Fejer check per step; empty without a reference minimizer.
    pub fejer_flags: Vec<bool>,
    pub stop_reason: StopReason,
    pub(crate) fejer_slack: f64,
}

impl PpaTrace {
    fn start(space: ModelSpace, x1: SpherePoint, f1: f64, reference: Option<SpherePoint>, fejer_slack: f64) -> Self {
        Self {
            space,
            iterates: vec![x1],
            lambdas: Vec::new(),
            f_values: vec![f1],
            step_distances: Vec::new(),
            sup_step: Vec::new(),
            c_values: Vec::new(),
            reference,
            rate_bounds: Vec::new(),
            fejer_flags: Vec::new(),
            stop_reason: StopReason::MaxIterations,
            fejer_slack,
        }
    }

    /// Number of proximal steps taken.
    pub fn steps(&self) -> usize {
        self.lambdas.len()
    }

    pub fn initial_point(&self) -> &SpherePoint {
        &self.iterates[0]
    }

    pub fn final_point(&self) -> &SpherePoint {
        self.iterates.last().expect("trace holds the initial point")
    }

    /// `l = sup_n d(x_{n+1}, x_n)` over the whole trace (0 for an empty trace).
    pub fn sup_step_overall(&self) -> f64 {
        self.sup_step.last().copied().unwrap_or(0.0)
    }

    /// `K = 1 / cos^2(sqrt(kappa) l) + 1`.
    pub fn k_constant(&self) -> f64 {
        k_from_sup_step(&self.space, self.sup_step_overall())
    }

    /// `C = K pi / 2`.
    pub fn c_constant(&self) -> f64 {
        self.k_constant() * FRAC_PI_2
    }

    /// Whether `f(x_{n+1}) <= f(x_n) + tol` at every step.
    pub fn objective_monotone(&self, tol: f64) -> bool {
        self.f_values.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// Whether `d(u, x_{n+1}) <= d(u, x_n) + tol` at every step.
    pub fn fejer_toward(&self, u: &SpherePoint, tol: f64) -> Result<bool> {
        let d: Vec<f64> = self
            .iterates
            .iter()
            .map(|x| self.space.distance(u, x))
            .collect::<Result<_>>()?;
        Ok(d.windows(2).all(|w| w[1] <= w[0] + tol))
    }

    /// `f(x_{n+1}) - f_u` for `n = 1..=N`.
    pub fn gaps(&self, f_u: f64) -> Vec<f64> {
        self.f_values[1..].iter().map(|v| v - f_u).collect()
    }

    /// Whether `f(x_{n+1}) - f_u <= rate_bound(n) + tol` for every `n`.
    pub fn rate_certified(&self, u: &SpherePoint, f_u: f64, tol: f64) -> Result<bool> {
        for (k, gap) in self.gaps(f_u).into_iter().enumerate() {
            if gap > rate_bound(self, u, k + 1)? + tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn k_from_sup_step(space: &ModelSpace, l: f64) -> f64 {
    let c = space.to_unit_metric(l).cos();
    1.0 / (c * c) + 1.0
}

/// `(K pi / 2) (1 - cos(sqrt(kappa) d(u, x_1))) / sum_{k<=n} lambda_k`, with
/// `K` built from the largest step among the first `n`.
pub fn rate_bound(trace: &PpaTrace, u: &SpherePoint, n: usize) -> Result<f64> {
    if trace.steps() == 0 {
        return Err(Error::EmptyTrace);
    }
    if n == 0 || n > trace.steps() {
        return Err(Error::ParameterOutOfRange {
            t: n as f64,
            length: trace.steps() as f64,
        });
    }
    let k = k_from_sup_step(&trace.space, trace.sup_step[n - 1]);
    let d1 = trace
        .space
        .to_unit_metric(trace.space.distance(u, trace.initial_point())?);
    let sum: f64 = trace.lambdas[..n].iter().sum();
    Ok(k * FRAC_PI_2 * (1.0 - d1.cos()) / sum)
}

/// Runs the proximal point algorithm from `x1`.
pub fn run_ppa(
    f: &ConvexFunctional,
    x1: &SpherePoint,
    schedule: &StepSchedule,
    space: &ModelSpace,
    run_cfg: &RunConfig,
    inner_cfg: &InnerSolverConfig,
) -> Result<PpaTrace> {
    schedule.validate()?;
    run_cfg.validate()?;
    inner_cfg.validate()?;
    space.check_point(x1)?;
    let f1 = f.evaluate(x1, space)?;
    let reference = run_cfg.reference_minimizer.clone();
    if let Some(u) = &reference {
        space.check_point(u)?;
    }
    let f_ref = reference.as_ref().map(|u| f.evaluate(u, space)).transpose()?;
    let fejer_slack = FEJER_TOL + 2.0 * run_cfg.reference_tolerance;
    let mut trace = PpaTrace::start(*space, x1.clone(), f1, reference.clone(), fejer_slack);

    for n in 1..=run_cfg.max_iterations {
        let lambda = schedule.lambda(n);
        let current = trace.final_point().clone();
        let r = match resolve(f, lambda, &current, space, inner_cfg) {
            Ok(r) => r,
            Err(e) => {
                return Err(Error::RunFailed {
                    step: n,
                    source: Box::new(e),
                    partial: Box::new(trace),
                })
            }
        };
        let step = space.distance(&r.point, &current)?;
        let f_next = f.evaluate(&r.point, space)?;
        trace.lambdas.push(lambda);
        trace.step_distances.push(step);
        trace.sup_step.push(trace.sup_step_overall().max(step));
        trace.c_values.push(r.c_value);
        trace.f_values.push(f_next);
        trace.iterates.push(r.point);

        if let Some(u) = &reference {
            let before = space.distance(u, &current)?;
            let after = space.distance(u, trace.final_point())?;
            trace.fejer_flags.push(after <= before + fejer_slack);
            trace.rate_bounds.push(rate_bound(&trace, u, n)?);
        }

        if run_cfg.stop_step_tol.is_some_and(|tol| step < tol) {
            trace.stop_reason = StopReason::StepTolerance;
            break;
        }
        if let (Some(tol), Some(fu)) = (run_cfg.stop_gap_tol, f_ref) {
            if f_next - fu < tol {
                trace.stop_reason = StopReason::GapTolerance;
                break;
            }
        }
    }
    Ok(trace)
}

/// `n` applications of the resolvent `R_f` (constant unit steps) starting at `x`.
pub fn iterated_resolvent_run(
    f: &ConvexFunctional,
    x: &SpherePoint,
    n: usize,
    space: &ModelSpace,
    run_cfg: &RunConfig,
    inner_cfg: &InnerSolverConfig,
) -> Result<PpaTrace> {
    let cfg = RunConfig {
        max_iterations: n,
        stop_step_tol: None,
        stop_gap_tol: None,
        ..run_cfg.clone()
    };
    run_ppa(f, x, &StepSchedule::Constant(1.0), space, &cfg, inner_cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceCertificate {
    /// Finite-horizon estimate of `inf_y limsup_n d(y, x_n)`.
    pub spherically_bounded_estimate: f64,
    pub sup_step: f64,
    pub verdict: bool,
    /// Number of trailing iterates standing in for the limit superior.
    pub window: usize,
}

/// Length of the tail window used for limsup/liminf surrogates: the last
/// quarter of `len`, at least 8 (or all of it when shorter).
pub fn tail_window(len: usize) -> usize {
    len.div_ceil(4).max(8).min(len)
}

/// Existence certificate for a sequence of points: spherical boundedness and
/// a uniform bound on consecutive distances, both with a margin below
/// `pi / (2 sqrt(kappa))`.
pub fn existence_certificate_for(points: &[SpherePoint], space: &ModelSpace) -> Result<ExistenceCertificate> {
    if points.len() < 2 {
        return Err(Error::EmptyTrace);
    }
    let window = tail_window(points.len());
    let tail = &points[points.len() - window..];
    let mut candidates: Vec<SpherePoint> = points.to_vec();
    let mut mean = vec![0.0; points[0].ambient_dim()];
    for p in tail {
        mean.iter_mut().zip(p.coords()).for_each(|(m, c)| *m += c);
    }
    if let Ok(m) = SpherePoint::new(mean) {
        candidates.push(m);
    }
    let mut estimate = f64::INFINITY;
    for y in &candidates {
        let mut worst: f64 = 0.0;
        for x in tail {
            worst = worst.max(space.distance(y, x)?);
        }
        estimate = estimate.min(worst);
    }
    let mut sup_step: f64 = 0.0;
    for w in points.windows(2) {
        sup_step = sup_step.max(space.distance(&w[0], &w[1])?);
    }
    let bound = space.admissible_radius() - space.from_unit_metric(EXISTENCE_MARGIN);
    Ok(ExistenceCertificate {
        spherically_bounded_estimate: estimate,
        sup_step,
        verdict: estimate < bound && sup_step < bound,
        window,
    })
}

pub fn existence_certificate(trace: &PpaTrace) -> Result<ExistenceCertificate> {
    existence_certificate_for(&trace.iterates, &trace.space)
}
