//! Spherical metric geometry.
//!
//! Points of `S^n` are stored as unit vectors of `R^{n+1}`. A [`ModelSpace`]
//! fixes the dimension and a curvature bound `kappa > 0`; the metric of the
//! CAT(kappa) space is the great-circle angle divided by `sqrt(kappa)`, so all
//! curvatures share one embedding and one set of formulas. Quantities that the
//! CAT(1) theory is stated in (cosines of distances, the tan-sin penalty) are
//! always evaluated on the *unit metric* `sqrt(kappa) * d`, see
//! [`ModelSpace::to_unit_metric`].

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Largest unit-metric distance still treated as non-antipodal.
const ANTIPODAL_MARGIN: f64 = 1e-12;

/// Slack allowed on geodesic parameters before they are rejected.
const PARAM_SLACK: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point of the unit sphere `S^n`, embedded in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Builds a point from (not necessarily normalized) coordinates.
    ///
    /// The vector is rescaled to unit Euclidean norm. At least two finite
    /// coordinates with a nonzero norm are required.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidPoint(format!(
                "need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        let n = norm(&coords);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidPoint("zero vector".into()));
        }
        Ok(Self::from_normalized(coords.into_iter().map(|c| c / n).collect()))
    }

    /// Renormalizes a vector already known to be finite and close to unit length.
    pub(crate) fn from_normalized(mut coords: Vec<f64>) -> Self {
        let n = norm(&coords);
        if n != 1.0 {
            coords.iter_mut().for_each(|c| *c /= n);
        }
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Number of embedding coordinates, `n + 1` for a point of `S^n`.
    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(&self.coords, &other.coords)
    }

    /// Great-circle angle to `other`, i.e. `arccos <x, y>`.
    ///
    /// Evaluated as `2 atan2(|x - y|, |x + y|)`, which equals the arccosine of
    /// the inner product on unit vectors but keeps full relative precision for
    /// nearly equal and nearly antipodal pairs.
    pub fn angle(&self, other: &SpherePoint) -> f64 {
        let (mut diff, mut sum) = (0.0, 0.0);
        for (a, b) in self.coords.iter().zip(&other.coords) {
            diff += (a - b) * (a - b);
            sum += (a + b) * (a + b);
        }
        2.0 * diff.sqrt().atan2(sum.sqrt())
    }

    /// Unit-speed direction at `self` of the great circle through `other`.
    ///
    /// Returns `None` when the points coincide or are antipodal.
    pub fn direction_to(&self, other: &SpherePoint) -> Option<Vec<f64>> {
        let c = self.dot(other);
        let w: Vec<f64> = other.coords.iter().zip(&self.coords).map(|(o, s)| o - c * s).collect();
        let n = norm(&w);
        (n > 0.0 && n.is_finite()).then(|| w.into_iter().map(|v| v / n).collect())
    }

    /// Exponential map in the unit metric: moves `|v|` radians along the tangent
    /// vector `v` (which must be orthogonal to `self`).
    pub fn exp(&self, v: &[f64]) -> SpherePoint {
        let len = norm(v);
        if len == 0.0 {
            return self.clone();
        }
        let (s, c) = len.sin_cos();
        let coords = self.coords.iter().zip(v).map(|(p, t)| c * p + s * t / len).collect();
        SpherePoint::from_normalized(coords)
    }

    /// Point reached after `s` radians along the unit tangent `u`.
    pub(crate) fn walk(&self, u: &[f64], s: f64) -> SpherePoint {
        let (sn, cs) = s.sin_cos();
        let coords = self.coords.iter().zip(u).map(|(p, t)| cs * p + sn * t).collect();
        SpherePoint::from_normalized(coords)
    }

    /// Orthogonal projection of an ambient vector onto the tangent space here.
    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        let c = dot(&self.coords, v);
        v.iter().zip(&self.coords).map(|(a, p)| a - c * p).collect()
    }

    /// An orthonormal basis of the tangent space, obtained by Gram-Schmidt on
    /// the standard basis. Deterministic for a given point.
    pub fn tangent_basis(&self) -> Vec<Vec<f64>> {
        let m = self.coords.len();
        let mut order: Vec<usize> = (0..m).collect();
        // least-aligned axes first for conditioning
        order.sort_by(|&a, &b| self.coords[a].abs().total_cmp(&self.coords[b].abs()));
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
        for &axis in &order {
            if basis.len() == m - 1 {
                break;
            }
            let mut e = vec![0.0; m];
            e[axis] = 1.0;
            let mut v = self.project_tangent(&e);
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let n = norm(&v);
            if n > 1e-8 {
                basis.push(v.into_iter().map(|x| x / n).collect());
            }
        }
        basis
    }
}

/// The ambient geodesic space: `S^dim` with the CAT(kappa) metric `angle / sqrt(kappa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpace {
    dim: usize,
    kappa: f64,
    sqrt_kappa: f64,
    admissible_radius: f64,
}

impl ModelSpace {
    pub fn new(dim: usize, kappa: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidSpace(format!("kappa must be positive, got {kappa}")));
        }
        let sqrt_kappa = kappa.sqrt();
        Ok(Self {
            dim,
            kappa,
            sqrt_kappa,
            admissible_radius: FRAC_PI_2 / sqrt_kappa,
        })
    }

    /// The unit sphere `S^dim` (curvature 1).
    pub fn sphere(dim: usize) -> Self {
        Self::new(dim, 1.0).expect("dimension is positive")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sqrt_kappa(&self) -> f64 {
        self.sqrt_kappa
    }

    /// Open bound `pi / (2 sqrt(kappa))` on admissible pairwise distances.
    pub fn admissible_radius(&self) -> f64 {
        self.admissible_radius
    }

    /// Converts a distance of this space into the CAT(1) metric `sqrt(kappa) d`.
    pub fn to_unit_metric(&self, d: f64) -> f64 {
        d * self.sqrt_kappa
    }

    pub fn from_unit_metric(&self, d: f64) -> f64 {
        d / self.sqrt_kappa
    }

    pub fn check_point(&self, p: &SpherePoint) -> Result<()> {
        if p.ambient_dim() != self.dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim + 1,
                found: p.ambient_dim(),
            });
        }
        Ok(())
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<SpherePoint> {
        let p = SpherePoint::new(coords)?;
        self.check_point(&p)?;
        Ok(p)
    }

    /// Distance in this space: the great-circle angle divided by `sqrt(kappa)`.
    pub fn distance(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(x.angle(y) / self.sqrt_kappa)
    }

    pub fn geodesic(&self, start: &SpherePoint, end: &SpherePoint) -> Result<Geodesic> {
        let length = self.distance(start, end)?;
        if length == 0.0 {
            return Err(Error::InvalidPoint("geodesic endpoints coincide".into()));
        }
        if self.to_unit_metric(length) >= PI - ANTIPODAL_MARGIN {
            return Err(Error::Antipodal);
        }
        let direction = start.direction_to(end).ok_or(Error::Antipodal)?;
        Ok(Geodesic {
            start: start.clone(),
            end: end.clone(),
            length,
            direction,
            sqrt_kappa: self.sqrt_kappa,
        })
    }

    /// The point at distance `t` from `x` on the geodesic from `x` to `y`.
    pub fn geodesic_point(&self, x: &SpherePoint, y: &SpherePoint, t: f64) -> Result<SpherePoint> {
        let length = self.distance(x, y)?;
        if !(t >= -PARAM_SLACK && t <= length + PARAM_SLACK) {
            return Err(Error::ParameterOutOfRange { t, length });
        }
        if self.to_unit_metric(length) >= PI - ANTIPODAL_MARGIN {
            return Err(Error::Antipodal);
        }
        if t <= 0.0 || length == 0.0 {
            return Ok(x.clone());
        }
        if t >= length {
            return Ok(y.clone());
        }
        let u = x.direction_to(y).ok_or(Error::Antipodal)?;
        Ok(x.walk(&u, self.to_unit_metric(t)))
    }

    /// `alpha x (+) (1 - alpha) y`: the point at parameter `(1 - alpha) d(x, y)`.
    pub fn convex_combination(&self, x: &SpherePoint, y: &SpherePoint, alpha: f64) -> Result<SpherePoint> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::ParameterOutOfRange { t: alpha, length: 1.0 });
        }
        let d = self.distance(x, y)?;
        self.geodesic_point(x, y, (1.0 - alpha) * d)
    }

    /// True iff every pairwise distance is strictly below the admissible radius.
    pub fn check_admissible(&self, points: &[SpherePoint]) -> bool {
        points.iter().enumerate().all(|(i, p)| {
            self.check_point(p).is_ok()
                && points[i + 1..]
                    .iter()
                    .all(|q| matches!(self.distance(p, q), Ok(d) if d < self.admissible_radius))
        })
    }

    /// Evaluates both sides of the three spherical comparison inequalities
    /// for the triple `(x1, x2, x3)` and weight `alpha`.
    ///
    /// All cosines are taken in the unit metric. The midpoint inequality is
    /// always evaluated at `alpha = 1/2`; the cosine-convexity inequality only
    /// when `x3` is within `pi/2` of both `x1` and `x2`.
    pub fn comparison_inequalities(
        &self,
        x1: &SpherePoint,
        x2: &SpherePoint,
        x3: &SpherePoint,
        alpha: f64,
    ) -> Result<ComparisonReport> {
        let d12 = self.to_unit_metric(self.distance(x1, x2)?);
        let d23 = self.to_unit_metric(self.distance(x2, x3)?);
        let d13 = self.to_unit_metric(self.distance(x1, x3)?);
        let perimeter = d12 + d23 + d13;
        if perimeter >= 2.0 * PI {
            return Err(Error::Perimeter(perimeter));
        }
        let z = self.convex_combination(x1, x2, alpha)?;
        let m = self.convex_combination(x1, x2, 0.5)?;
        let cz = self.to_unit_metric(self.distance(&z, x3)?).cos();
        let cm = self.to_unit_metric(self.distance(&m, x3)?).cos();
        let (c13, c23) = (d13.cos(), d23.cos());

        let sine_weighted = InequalityCheck::new(
            cz * d12.sin(),
            c13 * (alpha * d12).sin() + c23 * ((1.0 - alpha) * d12).sin(),
        );
        let midpoint = InequalityCheck::new(cm * (0.5 * d12).cos(), 0.5 * c13 + 0.5 * c23);
        let cosine_convexity =
            (d13 <= FRAC_PI_2 && d23 <= FRAC_PI_2).then(|| InequalityCheck::new(cz, alpha * c13 + (1.0 - alpha) * c23));
        Ok(ComparisonReport {
            sine_weighted,
            midpoint,
            cosine_convexity,
        })
    }
}

/// The unique geodesic between two distinct, non-antipodal points.
#[derive(Debug, Clone)]
pub struct Geodesic {
    start: SpherePoint,
    end: SpherePoint,
    length: f64,
    direction: Vec<f64>,
    sqrt_kappa: f64,
}

impl Geodesic {
    pub fn start(&self) -> &SpherePoint {
        &self.start
    }

    pub fn end(&self) -> &SpherePoint {
        &self.end
    }

    /// Length in the metric of the space the geodesic was built in.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `c(t)` for arc-length parameter `t` in `[0, length]`.
    pub fn at(&self, t: f64) -> Result<SpherePoint> {
        if !(t >= -PARAM_SLACK && t <= self.length + PARAM_SLACK) {
            return Err(Error::ParameterOutOfRange { t, length: self.length });
        }
        if t <= 0.0 {
            return Ok(self.start.clone());
        }
        if t >= self.length {
            return Ok(self.end.clone());
        }
        Ok(self.start.walk(&self.direction, t * self.sqrt_kappa))
    }
}

/// Both sides of an inequality `lhs >= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl InequalityCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            slack: lhs - rhs,
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// `cos d(z, x3) sin d12 >= cos d13 sin(a d12) + cos d23 sin((1-a) d12)`.
    pub sine_weighted: InequalityCheck,
    /// `cos d(m, x3) cos(d12 / 2) >= (cos d13 + cos d23) / 2` at the midpoint `m`.
    pub midpoint: InequalityCheck,
    /// `cos d(z, x3) >= a cos d13 + (1-a) cos d23`; `None` outside its hypotheses.
    pub cosine_convexity: Option<InequalityCheck>,
}

impl ComparisonReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.sine_weighted.holds(tol) && self.midpoint.holds(tol) && self.cosine_convexity.is_none_or(|c| c.holds(tol))
    }

    pub fn worst_slack(&self) -> f64 {
        let mut worst = self.sine_weighted.slack.min(self.midpoint.slack);
        if let Some(c) = self.cosine_convexity {
            worst = worst.min(c.slack);
        }
        worst
    }
}
