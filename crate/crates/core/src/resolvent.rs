//! The resolvent `R_{lambda f} x`: the unique minimizer of
//! `Phi(y) = lambda f(y) + tan s sin s`, `s = sqrt(kappa) d(y, x)`.
//!
//! Two inner solvers are provided. `GeodesicDescent` walks along great circles
//! in the steepest-descent direction of `Phi`, choosing each step length by
//! locating the zero of the directional derivative (which is monotone because
//! `Phi` is geodesically convex on the admissible cap). `NestedGoldenSection`
//! is a derivative-free fallback for `S^2`: golden-section searches nested over
//! the two coordinates of the gnomonic chart centred at `x`. The gnomonic chart
//! maps great circles to straight lines, so `Phi` stays quasi-convex along
//! every chart line and the nested searches are exact up to value resolution.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::functionals::{directional_derivative_fd, penalty, ConvexFunctional, PenaltyKernel};
use crate::geometry::{dot, norm, InequalityCheck, ModelSpace, SpherePoint};
use crate::oracle::golden_section_min;

/// Closest the solver lets a trial point get to `pi/2` from the centre `x`.
pub const PENALTY_GUARD: f64 = 1e-6;
/// Closest the solver lets a trial point get to `pi/2` from any anchor.
pub const ANCHOR_GUARD: f64 = 1e-9;
/// Initial bracket of the line search, in radians.
const INITIAL_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerMethod {
    #[default]
    GeodesicDescent,
    NestedGoldenSection,
}

impl InnerMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GeodesicDescent => "geodesic_descent",
            Self::NestedGoldenSection => "nested_golden_section",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolverConfig {
    pub method: InnerMethod,
    /// Termination threshold on the geodesic step length (radians).
    pub tol: f64,
    pub max_iter: usize,
    /// Step of the finite-difference stationarity check.
    pub fd_step: f64,
}

impl Default for InnerSolverConfig {
    fn default() -> Self {
        Self {
            method: InnerMethod::GeodesicDescent,
            tol: 1e-10,
            max_iter: 10_000,
            fd_step: 1e-6,
        }
    }
}

impl InnerSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "solver tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("solver max_iter must be at least 1".into()));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1e-2) {
            return Err(Error::InvalidConfig(format!(
                "fd_step must lie in (0, 1e-2), got {}",
                self.fd_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventResult {
    pub point: SpherePoint,
    /// `cos` of the unit-metric distance from the resolvent to `x`.
    pub c_value: f64,
    /// `lambda f + phi` at the returned point.
    pub objective: f64,
    pub inner_iterations: usize,
    /// Gradient norm (descent) or final bracket width (golden section).
    pub inner_residual: f64,
}

/// `lambda f(y) + phi(sqrt(kappa) d(y, x))`.
pub fn resolvent_objective(
    f: &ConvexFunctional,
    lambda: f64,
    x: &SpherePoint,
    y: &SpherePoint,
    space: &ModelSpace,
) -> Result<f64> {
    let s = space.to_unit_metric(space.distance(y, x)?);
    Ok(lambda * f.evaluate(y, space)? + penalty(s)?)
}

struct Problem<'a> {
    f: &'a ConvexFunctional,
    lambda: f64,
    x: &'a SpherePoint,
    space: &'a ModelSpace,
    anchors: Vec<&'a SpherePoint>,
}

impl Problem<'_> {
    fn value(&self, y: &SpherePoint) -> Result<f64> {
        resolvent_objective(self.f, self.lambda, self.x, y, self.space)
    }

    fn ambient_gradient(&self, y: &SpherePoint) -> Result<Vec<f64>> {
        let mut g = self.f.ambient_gradient(y)?;
        let c = y.dot(self.x);
        let coef = -(1.0 + 1.0 / (c * c));
        for (gi, xi) in g.iter_mut().zip(self.x.coords()) {
            *gi = self.lambda * *gi + coef * xi;
        }
        Ok(g)
    }

    /// Unit-metric angle limits that trial points must respect.
    fn guards(&self) -> impl Iterator<Item = (&SpherePoint, f64)> + '_ {
        std::iter::once((self.x, FRAC_PI_2 - PENALTY_GUARD))
            .chain(self.anchors.iter().map(|a| (*a, FRAC_PI_2 - ANCHOR_GUARD)))
    }

    /// Largest `s` such that every point `y.walk(u, s')`, `s' <= s`, satisfies the guards.
    fn max_step(&self, y: &SpherePoint, u: &[f64]) -> f64 {
        let mut s_max = FRAC_PI_2;
        for (q, limit) in self.guards() {
            let a = y.dot(q);
            let b = dot(u, q.coords());
            let r = a.hypot(b);
            let ratio = (limit.cos() / r).min(1.0);
            let bound = b.atan2(a) + ratio.acos();
            s_max = s_max.min(bound.max(0.0));
        }
        s_max
    }

    fn violation(&self, y: &SpherePoint) -> f64 {
        self.guards()
            .map(|(q, limit)| (y.angle(q) - limit).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Computes `R_{lambda f} x`.
pub fn resolve(
    f: &ConvexFunctional,
    lambda: f64,
    x: &SpherePoint,
    space: &ModelSpace,
    cfg: &InnerSolverConfig,
) -> Result<ResolventResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    cfg.validate()?;
    space.check_point(x)?;
    f.check_domain(x, space)?;
    let problem = Problem {
        f,
        lambda,
        x,
        space,
        anchors: f.anchors(),
    };
    let (point, iterations, residual) = match cfg.method {
        InnerMethod::GeodesicDescent => geodesic_descent(&problem, cfg)?,
        InnerMethod::NestedGoldenSection => nested_golden(&problem, cfg)?,
    };
    let s = space.to_unit_metric(space.distance(&point, x)?);
    Ok(ResolventResult {
        c_value: s.cos(),
        objective: problem.value(&point)?,
        point,
        inner_iterations: iterations,
        inner_residual: residual,
    })
}

fn geodesic_descent(p: &Problem<'_>, cfg: &InnerSolverConfig) -> Result<(SpherePoint, usize, f64)> {
    if !p.f.is_smooth() {
        return Err(Error::NonSmooth);
    }
    let mut y = p.x.clone();
    let mut iterations = 0;
    loop {
        let g = y.project_tangent(&p.ambient_gradient(&y)?);
        let gn = norm(&g);
        if gn == 0.0 {
            return Ok((y, iterations, 0.0));
        }
        if !gn.is_finite() {
            return Err(Error::SolverNotConverged {
                best: y,
                residual: gn,
                iterations,
            });
        }
        if iterations == cfg.max_iter {
            return Err(Error::SolverNotConverged {
                best: y,
                residual: gn,
                iterations,
            });
        }
        iterations += 1;
        // a tiny projected gradient keeps a relatively large normal residue
        let u = y.project_tangent(&g.iter().map(|v| -v / gn).collect::<Vec<_>>());
        let un = norm(&u);
        let u: Vec<f64> = u.iter().map(|v| v / un).collect();
        let s_max = p.max_step(&y, &u);
        let step = line_search(p, &y, &u, s_max, cfg.tol)?;
        y = y.walk(&u, step);
        if step < cfg.tol {
            let g = y.project_tangent(&p.ambient_gradient(&y)?);
            return Ok((y, iterations, norm(&g)));
        }
    }
}

/// Minimizes `s -> Phi(y.walk(u, s))` on `[0, s_max]` by bisection on the sign
/// of its derivative.
fn line_search(p: &Problem<'_>, y: &SpherePoint, u: &[f64], s_max: f64, tol: f64) -> Result<f64> {
    let slope = |s: f64| -> Result<f64> {
        let (sn, cs) = s.sin_cos();
        let point = y.walk(u, s);
        let velocity: Vec<f64> = y.coords().iter().zip(u).map(|(yi, ui)| -sn * yi + cs * ui).collect();
        Ok(dot(&p.ambient_gradient(&point)?, &velocity))
    };
    if s_max <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = INITIAL_STEP.min(s_max);
    while slope(hi)? < 0.0 {
        if hi >= s_max {
            return Ok(s_max);
        }
        lo = hi;
        hi = (2.0 * hi).min(s_max);
    }
    let width = (1e-3 * tol).max(1e-16);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn nested_golden(p: &Problem<'_>, cfg: &InnerSolverConfig) -> Result<(SpherePoint, usize, f64)> {
    if p.space.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: p.space.dim(),
            what: "nested golden-section resolvent",
        });
    }
    let fx = p.f.evaluate(p.x, p.space)?;
    let reach = match p.f.lower_bound() {
        Some(lb) => PenaltyKernel.inverse(p.lambda * (fx - lb)),
        None => FRAC_PI_2,
    }
    .min(FRAC_PI_2 - PENALTY_GUARD);
    if reach == 0.0 {
        return Ok((p.x.clone(), 0, 0.0));
    }
    let half_width = reach.tan();
    let basis = p.x.tangent_basis();
    let chart = |a: f64, b: f64| -> SpherePoint {
        let coords =
            p.x.coords()
                .iter()
                .zip(&basis[0])
                .zip(&basis[1])
                .map(|((xi, e1), e2)| xi + a * e1 + b * e2)
                .collect();
        SpherePoint::from_normalized(coords)
    };
    // values outside the guarded region rank above every feasible value and
    // grow with the violation, which keeps the chart objective quasi-convex
    let objective = |a: f64, b: f64| -> f64 {
        let y = chart(a, b);
        let v = p.violation(&y);
        if v > 0.0 {
            return 1e300 * (1.0 + v);
        }
        p.value(&y).unwrap_or(f64::INFINITY)
    };
    let inner =
        |a: f64| -> f64 { golden_section_min(|b| objective(a, b), -half_width, half_width, cfg.tol, cfg.max_iter).1 };
    let (a_best, _, outer_iterations, width) =
        golden_section_min_with_width(inner, -half_width, half_width, cfg.tol, cfg.max_iter);
    let (b_best, _, _) = golden_section_min(|b| objective(a_best, b), -half_width, half_width, cfg.tol, cfg.max_iter);
    let y = chart(a_best, b_best);
    // never return something worse than the centre
    if p.value(&y).unwrap_or(f64::INFINITY) > p.value(p.x)? {
        return Ok((p.x.clone(), outer_iterations, width));
    }
    Ok((y, outer_iterations, width))
}

fn golden_section_min_with_width(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64, usize, f64) {
    let (x, fx, iterations) = golden_section_min(&f, a, b, tol, max_iter);
    let width = (b - a) * crate::oracle::INV_PHI.powi(iterations as i32);
    (x, fx, iterations, width)
}

/// Smallest central-difference directional derivative of `Phi` at `point`
/// over `directions` evenly spread unit tangent directions (tangent-basis
/// vectors and their negatives beyond `S^2`).
pub fn stationarity_defect(
    f: &ConvexFunctional,
    lambda: f64,
    x: &SpherePoint,
    point: &SpherePoint,
    space: &ModelSpace,
    fd_step: f64,
    directions: usize,
) -> Result<f64> {
    let basis = point.tangent_basis();
    let dirs: Vec<Vec<f64>> = if basis.len() == 2 {
        (0..directions.max(1))
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / directions.max(1) as f64;
                basis[0]
                    .iter()
                    .zip(&basis[1])
                    .map(|(a, b)| theta.cos() * a + theta.sin() * b)
                    .collect()
            })
            .collect()
    } else {
        basis
            .iter()
            .flat_map(|e| [e.clone(), e.iter().map(|v| -v).collect()])
            .collect()
    };
    let phi = |y: &SpherePoint| resolvent_objective(f, lambda, x, y, space);
    let mut worst = f64::INFINITY;
    for u in &dirs {
        worst = worst.min(directional_derivative_fd(phi, point, u, fd_step)?);
    }
    Ok(worst)
}

/// Solver slack allowed on the resolvent inequalities.
pub const INEQUALITY_TOL: f64 = 1e-6;

/// A resolvent `R_{eta f} z` together with its arguments.
#[derive(Debug, Clone, Copy)]
pub struct ResolventSample<'a> {
    pub eta: f64,
    pub z: &'a SpherePoint,
    pub result: &'a ResolventResult,
}

fn unit_cos(space: &ModelSpace, a: &SpherePoint, b: &SpherePoint) -> Result<f64> {
    Ok(space.to_unit_metric(space.distance(a, b)?).cos())
}

/// `(1/C_x^2 + 1) D (C_x cos D - cos d(R y, x)) >= lambda (f(R x) - f(R y)) sin D`,
/// with `D = d(R x, R y)`, `R x = R_{lambda f} x`, `R y = R_{mu f} y`.
pub fn check_first_inequality(
    f: &ConvexFunctional,
    rx: ResolventSample<'_>,
    ry: ResolventSample<'_>,
    space: &ModelSpace,
) -> Result<InequalityCheck> {
    let d = space.to_unit_metric(space.distance(&rx.result.point, &ry.result.point)?);
    let cx = rx.result.c_value;
    let lhs = (1.0 / (cx * cx) + 1.0) * d * (cx * d.cos() - unit_cos(space, &ry.result.point, rx.z)?);
    let rhs = rx.eta * (f.evaluate(&rx.result.point, space)? - f.evaluate(&ry.result.point, space)?) * d.sin();
    Ok(InequalityCheck::new(lhs, rhs))
}

/// The two-resolvent cosine inequality
/// `(l Cx^2 (1+Cy^2) Cy + m Cy^2 (1+Cx^2) Cx) cos D >= l Cx^2 (1+Cy^2) cos d(R x, y) + m Cy^2 (1+Cx^2) cos d(R y, x)`.
pub fn check_resolvent_inequality(
    rx: ResolventSample<'_>,
    ry: ResolventSample<'_>,
    space: &ModelSpace,
) -> Result<InequalityCheck> {
    let (cx, cy) = (rx.result.c_value, ry.result.c_value);
    let a = rx.eta * cx * cx * (1.0 + cy * cy);
    let b = ry.eta * cy * cy * (1.0 + cx * cx);
    let cos_d = unit_cos(space, &rx.result.point, &ry.result.point)?;
    let lhs = (a * cy + b * cx) * cos_d;
    let rhs = a * unit_cos(space, &rx.result.point, ry.z)? + b * unit_cos(space, &ry.result.point, rx.z)?;
    Ok(InequalityCheck::new(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FejerReport {
    /// `(pi/2)(1/C^2 + 1)(C cos d(u, R x) - cos d(u, x)) >= lambda (f(R x) - f(u))`.
    pub rate: InequalityCheck,
    /// `C cos d(u, R x) >= cos d(u, x)`.
    pub contraction: InequalityCheck,
    /// `min(cos d(R x, x), cos d(u, R x)) >= cos d(u, x)`.
    pub consequence: InequalityCheck,
}

impl FejerReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.rate.holds(tol) && self.contraction.holds(tol) && self.consequence.holds(tol)
    }

    pub fn worst_slack(&self) -> f64 {
        self.rate.slack.min(self.contraction.slack).min(self.consequence.slack)
    }
}

/// Inequalities between one resolvent step and a minimizer `u` of `f`.
pub fn check_fejer_inequality(
    f: &ConvexFunctional,
    rx: ResolventSample<'_>,
    u: &SpherePoint,
    space: &ModelSpace,
) -> Result<FejerReport> {
    let c = rx.result.c_value;
    let cos_u_r = unit_cos(space, u, &rx.result.point)?;
    let cos_u_x = unit_cos(space, u, rx.z)?;
    let gap = f.evaluate(&rx.result.point, space)? - f.evaluate(u, space)?;
    Ok(FejerReport {
        rate: InequalityCheck::new(
            FRAC_PI_2 * (1.0 / (c * c) + 1.0) * (c * cos_u_r - cos_u_x),
            rx.eta * gap,
        ),
        contraction: InequalityCheck::new(c * cos_u_r, cos_u_x),
        consequence: InequalityCheck::new(c.min(cos_u_r), cos_u_x),
    })
}
