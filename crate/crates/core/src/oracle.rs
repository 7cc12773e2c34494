//! Brute-force ground truth on `S^2`: exhaustive grid minimization with local
//! refinement, and golden-section search on a geodesic.
//!
//! Nothing here depends on the resolvent solver; the oracles only evaluate the
//! objectives they are handed.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{ConvexFunctional, FunctionalKind, PenaltyKernel};
use crate::geometry::{ModelSpace, SpherePoint};
use crate::resolvent::{resolvent_objective, PENALTY_GUARD};

/// `1 / golden ratio`.
pub const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Grid resolution for [`grid_argmin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Initial spacing in radians.
    pub spacing: f64,
    /// Each round re-grids a neighbourhood of the incumbent ten times finer.
    pub refinement_rounds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            spacing: 0.01,
            refinement_rounds: 3,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "grid spacing must be positive, got {}",
                self.spacing
            )));
        }
        Ok(())
    }

    pub fn final_spacing(&self) -> f64 {
        self.spacing / 10f64.powi(self.refinement_rounds as i32)
    }
}

/// Geodesic ball `{ y : angle(y, center) <= radius }` searched by the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchCap {
    pub center: SpherePoint,
    /// Unit-metric radius.
    pub radius: f64,
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
///
/// Returns the best abscissa, its value, and the number of bracket reductions.
pub fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64, usize) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iter {
        iterations += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    // the minimum may sit on the boundary of [a, b]
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for e in [a, b] {
        let fe = f(e);
        if fe < best.1 {
            best = (e, fe);
        }
    }
    let (x, fx) = best;
    (x, fx, iterations)
}

/// Golden-section minimization of `objective` over `[0, length]` to bracket width `tol`.
pub fn geodesic_golden_section(objective: impl Fn(f64) -> f64, length: f64, tol: f64) -> (f64, f64) {
    let (t, v, _) = golden_section_min(objective, 0.0, length, tol, usize::MAX);
    (t, v)
}

pub(crate) fn require_sphere2(space: &ModelSpace) -> Result<()> {
    if space.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: space.dim(),
            what: "grid oracle",
        });
    }
    Ok(())
}

/// Points of a polar grid on the cap, ring by ring (deterministic order).
fn cap_rings(cap: &SearchCap, spacing: f64) -> Vec<Vec<SpherePoint>> {
    let basis = cap.center.tangent_basis();
    let rings = (cap.radius / spacing).floor() as usize;
    (0..=rings)
        .map(|k| {
            let theta = k as f64 * spacing;
            if k == 0 {
                return vec![cap.center.clone()];
            }
            let count = ((2.0 * PI * theta.sin() / spacing).ceil() as usize).max(1);
            (0..count)
                .map(|j| {
                    let az = 2.0 * PI * j as f64 / count as f64;
                    let v: Vec<f64> = basis[0]
                        .iter()
                        .zip(&basis[1])
                        .map(|(a, b)| theta * (az.cos() * a + az.sin() * b))
                        .collect();
                    cap.center.exp(&v)
                })
                .collect()
        })
        .collect()
}

/// Flattened [`cap_rings`] grid, in the same order.
pub(crate) fn cap_grid(cap: &SearchCap, spacing: f64) -> Vec<SpherePoint> {
    cap_rings(cap, spacing).into_iter().flatten().collect()
}

/// Square grid of half-width `extent` and step `step` in exponential coordinates at `center`.
fn local_patch(center: &SpherePoint, extent: f64, step: f64) -> Vec<SpherePoint> {
    let basis = center.tangent_basis();
    let n = (extent / step).round() as i64;
    let mut pts = Vec::with_capacity(((2 * n + 1) * (2 * n + 1)) as usize);
    for i in -n..=n {
        for j in -n..=n {
            let (a, b) = (i as f64 * step, j as f64 * step);
            let v: Vec<f64> = basis[0].iter().zip(&basis[1]).map(|(e1, e2)| a * e1 + b * e2).collect();
            pts.push(center.exp(&v));
        }
    }
    pts
}

/// Lowest finite value, earliest index on ties.
fn best_of<F>(points: &[SpherePoint], objective: &F) -> Option<(usize, f64)>
where
    F: Fn(&SpherePoint) -> f64 + Sync,
{
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| (i, objective(p)))
        .filter(|(_, v)| v.is_finite())
        .reduce_with(|a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
}

/// Exhaustive minimization of `objective` over `cap` on `S^2`, followed by
/// `grid.refinement_rounds` rounds of ten-times-finer local re-gridding.
/// Points where the objective is not finite are skipped.
pub fn grid_argmin<F>(objective: F, cap: &SearchCap, space: &ModelSpace, grid: &GridSpec) -> Result<(SpherePoint, f64)>
where
    F: Fn(&SpherePoint) -> f64 + Sync,
{
    require_sphere2(space)?;
    grid.validate()?;
    space.check_point(&cap.center)?;
    let points = cap_grid(cap, grid.spacing);
    let (idx, mut value) = best_of(&points, &objective)
        .ok_or_else(|| Error::InvalidConfig("objective is not finite anywhere on the grid".into()))?;
    let mut best = points[idx].clone();
    let mut spacing = grid.spacing;
    for _ in 0..grid.refinement_rounds {
        let patch = local_patch(&best, 2.0 * spacing, spacing / 10.0);
        if let Some((i, v)) = best_of(&patch, &objective) {
            if v <= value {
                best = patch[i].clone();
                value = v;
            }
        }
        spacing /= 10.0;
    }
    Ok((best, value))
}

/// Grid minimizer of `f` over the admissible region of its anchors.
pub fn functional_argmin(f: &ConvexFunctional, space: &ModelSpace, grid: &GridSpec) -> Result<(SpherePoint, f64)> {
    let center = f
        .anchor_centroid()
        .ok_or_else(|| Error::InvalidFunctional("grid oracle needs an anchored functional".into()))?;
    let cap = SearchCap {
        center,
        radius: FRAC_PI_2,
    };
    grid_argmin(|y| f.evaluate(y, space).unwrap_or(f64::INFINITY), &cap, space, grid)
}

/// Exact minimizer of a `cosine_mean` functional: the normalized weighted
/// mean of its anchors, since `sum w_i (1 - <y, p_i>) = W - <y, sum w_i p_i>`.
pub fn cosine_mean_argmin(f: &ConvexFunctional) -> Option<SpherePoint> {
    (f.kind() == FunctionalKind::CosineMean)
        .then(|| f.anchor_centroid())
        .flatten()
}

/// Grid minimizer of the resolvent objective `lambda f + phi(d(., x))`.
pub fn resolvent_argmin(
    f: &ConvexFunctional,
    lambda: f64,
    x: &SpherePoint,
    space: &ModelSpace,
    grid: &GridSpec,
) -> Result<(SpherePoint, f64)> {
    let fx = f.evaluate(x, space)?;
    let reach = f
        .lower_bound()
        .map(|lb| PenaltyKernel.inverse(lambda * (fx - lb)))
        .unwrap_or(FRAC_PI_2)
        .min(FRAC_PI_2 - PENALTY_GUARD);
    let cap = SearchCap {
        center: x.clone(),
        radius: reach + grid.spacing,
    };
    grid_argmin(
        |y| resolvent_objective(f, lambda, x, y, space).unwrap_or(f64::INFINITY),
        &cap,
        space,
        grid,
    )
}
