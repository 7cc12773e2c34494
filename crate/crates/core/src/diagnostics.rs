//! Asymptotic centers, the Cesaro-weighted cosine function `g` and tail-window
//! surrogates for limits of finite sequences.
//!
//! Every `liminf`/`limsup` over `n -> infinity` is replaced by the min/max over
//! the last [`tail_window`] terms.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ModelSpace, SpherePoint};
use crate::oracle::{cap_grid, grid_argmin, require_sphere2, GridSpec, SearchCap};
use crate::ppa::{tail_window, PpaTrace};
use crate::sampling;

/// Slack for the concavity and nonexpansiveness checks of `g`.
pub const G_CHECK_TOL: f64 = 1e-9;
/// Tolerance of [`monotone_limit_check`].
pub const MONOTONE_LIMIT_TOL: f64 = 1e-9;
/// Largest grid spacing accepted by the grid searches here.
pub const MAX_GRID_SPACING: f64 = 0.05;

/// `g(y) = min_{n in tail} (1 / sigma_n) sum_{k<=n} beta_k cos(sqrt(kappa) d(y, z_k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GFunction {
    sequence: Vec<SpherePoint>,
    betas: Vec<f64>,
    horizon: usize,
    window: usize,
}

impl GFunction {
    pub fn new(sequence: Vec<SpherePoint>, betas: Vec<f64>) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if sequence.len() != betas.len() {
            return Err(Error::DimensionMismatch {
                expected: sequence.len(),
                found: betas.len(),
            });
        }
        if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidConfig(format!("weights must be positive, got {b}")));
        }
        let dim = sequence[0].ambient_dim();
        if let Some(p) = sequence.iter().find(|p| p.ambient_dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.ambient_dim(),
            });
        }
        let horizon = sequence.len();
        Ok(Self {
            sequence,
            betas,
            horizon,
            window: tail_window(horizon),
        })
    }

    /// Equal weights.
    pub fn uniform(sequence: Vec<SpherePoint>) -> Result<Self> {
        let betas = vec![1.0; sequence.len()];
        Self::new(sequence, betas)
    }

    /// `z_k = x_{k+1}` with `beta_k = lambda_k C_k^2 / (1 + C_k^2)`, where
    /// `C_k = cos(sqrt(kappa) d(x_{k+1}, x_k))`.
    pub fn from_trace(trace: &PpaTrace) -> Result<Self> {
        if trace.steps() == 0 {
            return Err(Error::EmptyTrace);
        }
        let betas = trace
            .lambdas
            .iter()
            .zip(&trace.c_values)
            .map(|(l, c)| l * c * c / (1.0 + c * c))
            .collect();
        Self::new(trace.iterates[1..].to_vec(), betas)
    }

    pub fn sequence(&self) -> &[SpherePoint] {
        &self.sequence
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of trailing partial averages the liminf is taken over.
    pub fn window(&self) -> usize {
        self.window
    }
}

/// Value of `g` at `y`.
pub fn g_evaluate(gf: &GFunction, y: &SpherePoint, space: &ModelSpace) -> Result<f64> {
    space.check_point(y)?;
    let start = gf.horizon - gf.window;
    let (mut num, mut sigma) = (0.0, 0.0);
    let mut best = f64::INFINITY;
    for (k, (z, b)) in gf.sequence.iter().zip(&gf.betas).enumerate() {
        num += b * y.angle(z).cos();
        sigma += b;
        if k >= start {
            best = best.min(num / sigma);
        }
    }
    Ok(best)
}

/// Center of the cap searched for maximizers/centers: the normalized mean of
/// the tail, falling back to the last point.
fn tail_center(points: &[SpherePoint], window: usize) -> SpherePoint {
    let tail = &points[points.len() - window..];
    let mut mean = vec![0.0; tail[0].ambient_dim()];
    for p in tail {
        mean.iter_mut().zip(p.coords()).for_each(|(m, c)| *m += c);
    }
    SpherePoint::new(mean).unwrap_or_else(|_| tail[tail.len() - 1].clone())
}

fn check_spacing(grid_spacing: f64) -> Result<()> {
    if !(grid_spacing > 0.0 && grid_spacing <= MAX_GRID_SPACING) {
        return Err(Error::InvalidConfig(format!(
            "grid spacing must lie in (0, {MAX_GRID_SPACING}], got {grid_spacing}"
        )));
    }
    Ok(())
}

fn search_grid(grid_spacing: f64) -> GridSpec {
    GridSpec {
        spacing: grid_spacing,
        refinement_rounds: 2,
    }
}

/// Maximizer of `g` on `S^2`: exhaustive grid over the hemisphere around the
/// tail of the sequence, then local re-gridding.
pub fn g_maximize(gf: &GFunction, space: &ModelSpace, grid_spacing: f64) -> Result<SpherePoint> {
    require_sphere2(space)?;
    check_spacing(grid_spacing)?;
    let cap = SearchCap {
        center: tail_center(&gf.sequence, gf.window),
        radius: FRAC_PI_2,
    };
    let (p, _) = grid_argmin(
        |y| g_evaluate(gf, y, space).map(|v| -v).unwrap_or(f64::INFINITY),
        &cap,
        space,
        &search_grid(grid_spacing),
    )?;
    Ok(p)
}

/// Diameter (in the metric of `space`) of the set of grid points whose `g`
/// value is within `tol` of the grid maximum.
pub fn g_maximizer_cluster_diameter(gf: &GFunction, space: &ModelSpace, grid_spacing: f64, tol: f64) -> Result<f64> {
    require_sphere2(space)?;
    check_spacing(grid_spacing)?;
    let cap = SearchCap {
        center: tail_center(&gf.sequence, gf.window),
        radius: FRAC_PI_2,
    };
    let points = cap_grid(&cap, grid_spacing);
    let values: Vec<f64> = points
        .par_iter()
        .map(|y| g_evaluate(gf, y, space).unwrap_or(f64::NEG_INFINITY))
        .collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let near: Vec<&SpherePoint> = points
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v >= max - tol)
        .map(|(p, _)| p)
        .collect();
    let mut diam: f64 = 0.0;
    for (i, a) in near.iter().enumerate() {
        for b in &near[i + 1..] {
            diam = diam.max(space.distance(a, b)?);
        }
    }
    Ok(diam)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GConcavityReport {
    pub trials: usize,
    /// `min g(a y1 + (1-a) y2) - a g(y1) - (1-a) g(y2)`.
    pub concavity_worst_slack: f64,
    /// `min sqrt(kappa) d(y1, y2) - |g(y1) - g(y2)|`.
    pub lipschitz_worst_slack: f64,
    /// Unit-metric radius of the cap the pairs were drawn from.
    pub sampling_radius: f64,
    pub passed: bool,
}

/// Randomized check that `g` is concave and nonexpansive on a cap around the
/// tail of its sequence, small enough that every `z_k` stays within `pi/2` of
/// every sampled geodesic.
pub fn g_concavity_check(gf: &GFunction, space: &ModelSpace, trials: usize, seed: u64) -> Result<GConcavityReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let center = tail_center(&gf.sequence, gf.window);
    let spread = gf.sequence.iter().map(|z| center.angle(z)).fold(0.0, f64::max);
    let radius = 0.95 * (FRAC_PI_2 - spread).max(0.0);
    let mut rng = sampling::seeded(seed);
    let mut concave = f64::INFINITY;
    let mut lipschitz = f64::INFINITY;
    for _ in 0..trials {
        let y1 = sampling::in_cap(&mut rng, &center, radius);
        let y2 = sampling::in_cap(&mut rng, &center, radius);
        let alpha: f64 = rng.random();
        let g1 = g_evaluate(gf, &y1, space)?;
        let g2 = g_evaluate(gf, &y2, space)?;
        let mid = if y1.angle(&y2) < 1e-15 {
            y1.clone()
        } else {
            space.convex_combination(&y1, &y2, alpha)?
        };
        let gm = g_evaluate(gf, &mid, space)?;
        concave = concave.min(gm - alpha * g1 - (1.0 - alpha) * g2);
        lipschitz = lipschitz.min(space.to_unit_metric(space.distance(&y1, &y2)?) - (g1 - g2).abs());
    }
    Ok(GConcavityReport {
        trials,
        concavity_worst_slack: concave,
        lipschitz_worst_slack: lipschitz,
        sampling_radius: radius,
        passed: concave >= -G_CHECK_TOL && lipschitz >= -G_CHECK_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCenterResult {
    pub center: SpherePoint,
    /// Tail-window maximum of `d(center, x_n)`, in the metric of the space.
    pub radius: f64,
    pub grid_spacing: f64,
    pub window: usize,
}

impl AsymptoticCenterResult {
    /// Whether the radius certifies spherical boundedness.
    pub fn spherically_bounded(&self, space: &ModelSpace) -> bool {
        self.radius < space.admissible_radius()
    }
}

/// Minimizer on `S^2` of `y -> max_{n in tail} d(y, x_n)`.
pub fn asymptotic_center(
    sequence: &[SpherePoint],
    space: &ModelSpace,
    grid_spacing: f64,
) -> Result<AsymptoticCenterResult> {
    require_sphere2(space)?;
    check_spacing(grid_spacing)?;
    if sequence.len() < 2 {
        return Err(Error::EmptyTrace);
    }
    for p in sequence {
        space.check_point(p)?;
    }
    let window = tail_window(sequence.len());
    let tail = &sequence[sequence.len() - window..];
    let tail_max = |y: &SpherePoint| tail.iter().map(|x| y.angle(x)).fold(0.0, f64::max);
    let cap = SearchCap {
        center: tail_center(sequence, window),
        radius: FRAC_PI_2,
    };
    let (center, value) = grid_argmin(tail_max, &cap, space, &search_grid(grid_spacing))?;
    Ok(AsymptoticCenterResult {
        center,
        radius: space.from_unit_metric(value),
        grid_spacing,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotoneMap {
    /// Nondecreasing: `f(limsup t_n) = limsup f(t_n)`.
    Identity,
    /// Nonincreasing on `[0, pi]`: `f(limsup t_n) = liminf f(t_n)`.
    Cosine,
}

impl MonotoneMap {
    fn apply(&self, t: f64) -> f64 {
        match self {
            Self::Identity => t,
            Self::Cosine => t.cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneLimitReport {
    /// `f(max tail t_n)`.
    pub lhs: f64,
    /// `max tail f(t_n)` for a nondecreasing map, `min tail f(t_n)` otherwise.
    pub rhs: f64,
    pub window: usize,
    /// False when the values leave the range where the map is monotone.
    pub in_domain: bool,
    pub holds: bool,
}

/// Tail-window check of `f(limsup t_n) = limsup f(t_n)` (nondecreasing `f`)
/// or `f(limsup t_n) = liminf f(t_n)` (nonincreasing `f`).
pub fn monotone_limit_check(values: &[f64], map: MonotoneMap) -> MonotoneLimitReport {
    let window = tail_window(values.len());
    let tail = &values[values.len() - window..];
    let in_domain = !values.is_empty()
        && values.iter().all(|v| v.is_finite())
        && (map == MonotoneMap::Identity || values.iter().all(|v| (0.0..=PI).contains(v)));
    if !in_domain {
        return MonotoneLimitReport {
            lhs: f64::NAN,
            rhs: f64::NAN,
            window,
            in_domain,
            holds: false,
        };
    }
    let limsup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mapped = tail.iter().map(|t| map.apply(*t));
    let rhs = match map {
        MonotoneMap::Identity => mapped.fold(f64::NEG_INFINITY, f64::max),
        MonotoneMap::Cosine => mapped.fold(f64::INFINITY, f64::min),
    };
    let lhs = map.apply(limsup);
    MonotoneLimitReport {
        lhs,
        rhs,
        window,
        in_domain,
        holds: (lhs - rhs).abs() <= MONOTONE_LIMIT_TOL,
    }
}
