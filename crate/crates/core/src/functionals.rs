//! Convex objectives on admissible subsets of the sphere and the tan-sin
//! penalty kernel.
//!
//! Every anchored family is a weighted sum (or maximum) of a convex,
//! nondecreasing profile applied to the unit-metric distance to an anchor:
//!
//! | kind          | term                         |
//! |---------------|------------------------------|
//! | `cosine_mean` | `w (1 - cos s)`              |
//! | `tan_sin_sum` | `w tan s sin s`              |
//! | `max_cosine`  | `max_i w_i (1 - cos s_i)`    |
//!
//! where `s = sqrt(kappa) d(y, p)`. Writing `c = cos s = <y, p>`, the first two
//! profiles are `1 - c` and `1/c - c`, which gives the closed-form gradients
//! used by the resolvent solver.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Geodesic, ModelSpace, SpherePoint};
use crate::sampling;

/// Tolerance of the randomized convexity certificate.
pub const CONVEXITY_TOL: f64 = 1e-9;

/// `phi(t) = tan t sin t` on `[0, pi/2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PenaltyKernel;

impl PenaltyKernel {
    pub fn value(&self, t: f64) -> Result<f64> {
        penalty(t)
    }

    /// `phi'(t) = sin t (1 + 1 / cos^2 t)`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        check_penalty_domain(t)?;
        let c = t.cos();
        Ok(t.sin() * (1.0 + 1.0 / (c * c)))
    }

    /// The unique `t` in `[0, pi/2)` with `phi(t) = v`, for `v >= 0`.
    pub fn inverse(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        // phi = 1/c - c  =>  c^2 + v c - 1 = 0
        let c = 2.0 / (v + (v * v + 4.0).sqrt());
        c.acos()
    }
}

fn check_penalty_domain(t: f64) -> Result<()> {
    if !(0.0..FRAC_PI_2).contains(&t) {
        return Err(Error::PenaltyDomain(t));
    }
    Ok(())
}

/// The resolvent penalty `tan t sin t`.
pub fn penalty(t: f64) -> Result<f64> {
    check_penalty_domain(t)?;
    Ok(t.tan() * t.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    CosineMean,
    TanSinSum,
    MaxCosine,
    CustomCombination,
    Constant,
    /// Sign-flipped functional. Not convex; exists to exercise the certifier.
    Negated,
}

impl FunctionalKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CosineMean => "cosine_mean",
            Self::TanSinSum => "tan_sin_sum",
            Self::MaxCosine => "max_cosine",
            Self::CustomCombination => "custom_combination",
            Self::Constant => "constant",
            Self::Negated => "negated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Profile {
    Cosine,
    TanSin,
}

#[derive(Debug, Clone)]
enum Form {
    Sum {
        profile: Profile,
        anchors: Vec<SpherePoint>,
        weights: Vec<f64>,
    },
    Max {
        anchors: Vec<SpherePoint>,
        weights: Vec<f64>,
    },
    Constant(f64),
    Combination(Vec<(f64, ConvexFunctional)>),
    Negated(Box<ConvexFunctional>),
}

/// A real-valued objective on the admissible region of its anchors.
#[derive(Debug, Clone)]
pub struct ConvexFunctional {
    form: Form,
}

fn validate_anchors(anchors: &[SpherePoint], weights: &[f64], space: &ModelSpace) -> Result<()> {
    if anchors.is_empty() {
        return Err(Error::InvalidFunctional("anchor list is empty".into()));
    }
    if anchors.len() != weights.len() {
        return Err(Error::InvalidFunctional(format!(
            "{} anchors but {} weights",
            anchors.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidFunctional(format!("weight {w} is not positive")));
    }
    for a in anchors {
        space.check_point(a)?;
    }
    if !space.check_admissible(anchors) {
        return Err(Error::InvalidFunctional("anchors are not pairwise admissible".into()));
    }
    Ok(())
}

impl ConvexFunctional {
    /// `sum_i w_i (1 - cos s_i)`.
    pub fn cosine_mean(anchors: Vec<SpherePoint>, weights: Vec<f64>, space: &ModelSpace) -> Result<Self> {
        validate_anchors(&anchors, &weights, space)?;
        Ok(Self {
            form: Form::Sum {
                profile: Profile::Cosine,
                anchors,
                weights,
            },
        })
    }

    /// `sum_i w_i tan s_i sin s_i`.
    pub fn tan_sin_sum(anchors: Vec<SpherePoint>, weights: Vec<f64>, space: &ModelSpace) -> Result<Self> {
        validate_anchors(&anchors, &weights, space)?;
        Ok(Self {
            form: Form::Sum {
                profile: Profile::TanSin,
                anchors,
                weights,
            },
        })
    }

    /// `max_i w_i (1 - cos s_i)`.
    pub fn max_cosine(anchors: Vec<SpherePoint>, weights: Vec<f64>, space: &ModelSpace) -> Result<Self> {
        validate_anchors(&anchors, &weights, space)?;
        Ok(Self {
            form: Form::Max { anchors, weights },
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            form: Form::Constant(value),
        }
    }

    /// Nonnegative combination `sum_j c_j f_j`.
    ///
    /// The union of all term anchors must itself be admissible, so that the
    /// combination has a common domain.
    pub fn combination(terms: Vec<(f64, ConvexFunctional)>, space: &ModelSpace) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidFunctional("combination has no terms".into()));
        }
        if let Some((c, _)) = terms.iter().find(|(c, _)| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidFunctional(format!("coefficient {c} is negative")));
        }
        let f = Self {
            form: Form::Combination(terms),
        };
        let anchors: Vec<SpherePoint> = f.anchors().into_iter().cloned().collect();
        if !space.check_admissible(&anchors) {
            return Err(Error::InvalidFunctional("anchors are not pairwise admissible".into()));
        }
        Ok(f)
    }

    /// `-f`. Concave whenever `f` is convex.
    pub fn negated(f: ConvexFunctional) -> Self {
        Self {
            form: Form::Negated(Box::new(f)),
        }
    }

    pub fn kind(&self) -> FunctionalKind {
        match &self.form {
            Form::Sum {
                profile: Profile::Cosine,
                ..
            } => FunctionalKind::CosineMean,
            Form::Sum {
                profile: Profile::TanSin,
                ..
            } => FunctionalKind::TanSinSum,
            Form::Max { .. } => FunctionalKind::MaxCosine,
            Form::Constant(_) => FunctionalKind::Constant,
            Form::Combination(_) => FunctionalKind::CustomCombination,
            Form::Negated(_) => FunctionalKind::Negated,
        }
    }

    /// Whether convexity follows from construction.
    pub fn is_certified_convex(&self) -> bool {
        match &self.form {
            Form::Negated(inner) => matches!(inner.form, Form::Constant(_)),
            Form::Combination(terms) => terms.iter().all(|(_, f)| f.is_certified_convex()),
            _ => true,
        }
    }

    /// Whether the functional is continuously differentiable on its domain.
    pub fn is_smooth(&self) -> bool {
        match &self.form {
            Form::Max { anchors, .. } => anchors.len() == 1,
            Form::Combination(terms) => terms.iter().all(|(_, f)| f.is_smooth()),
            Form::Negated(inner) => inner.is_smooth(),
            _ => true,
        }
    }

    /// All anchors, in evaluation order.
    pub fn anchors(&self) -> Vec<&SpherePoint> {
        match &self.form {
            Form::Sum { anchors, .. } | Form::Max { anchors, .. } => anchors.iter().collect(),
            Form::Constant(_) => Vec::new(),
            Form::Combination(terms) => terms.iter().flat_map(|(_, f)| f.anchors()).collect(),
            Form::Negated(inner) => inner.anchors(),
        }
    }

    /// Weight attached to each anchor (combination coefficients folded in).
    pub fn anchor_weights(&self) -> Vec<f64> {
        match &self.form {
            Form::Sum { weights, .. } | Form::Max { weights, .. } => weights.clone(),
            Form::Constant(_) => Vec::new(),
            Form::Combination(terms) => terms
                .iter()
                .flat_map(|(c, f)| f.anchor_weights().into_iter().map(move |w| c * w))
                .collect(),
            Form::Negated(inner) => inner.anchor_weights(),
        }
    }

    /// Normalized weighted mean of the anchors, if there are any.
    pub fn anchor_centroid(&self) -> Option<SpherePoint> {
        let anchors = self.anchors();
        let first = anchors.first()?;
        let mut acc = vec![0.0; first.ambient_dim()];
        for (a, w) in anchors.iter().zip(self.anchor_weights()) {
            acc.iter_mut().zip(a.coords()).for_each(|(s, c)| *s += w * c);
        }
        SpherePoint::new(acc).ok()
    }

    /// A lower bound of the functional on its domain; `None` if unbounded below.
    pub fn lower_bound(&self) -> Option<f64> {
        match &self.form {
            Form::Sum { .. } | Form::Max { .. } => Some(0.0),
            Form::Constant(v) => Some(*v),
            Form::Combination(terms) => terms.iter().map(|(c, f)| f.lower_bound().map(|b| c * b)).sum(),
            Form::Negated(inner) => match inner.form {
                Form::Constant(v) => Some(-v),
                _ => None,
            },
        }
    }

    /// Checks that `y` is strictly within the admissible radius of every anchor.
    pub fn check_domain(&self, y: &SpherePoint, space: &ModelSpace) -> Result<()> {
        for (index, a) in self.anchors().into_iter().enumerate() {
            let distance = space.distance(y, a)?;
            if distance >= space.admissible_radius() {
                return Err(Error::Inadmissible { index, distance });
            }
        }
        Ok(())
    }

    /// Value at `y`. Distances are measured in `space` and converted to the
    /// unit metric before entering the profiles.
    pub fn evaluate(&self, y: &SpherePoint, space: &ModelSpace) -> Result<f64> {
        self.evaluate_from(y, space, 0)
    }

    fn evaluate_from(&self, y: &SpherePoint, space: &ModelSpace, offset: usize) -> Result<f64> {
        let unit_distances = |anchors: &[SpherePoint]| -> Result<Vec<f64>> {
            anchors
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let d = space.distance(y, a)?;
                    if d >= space.admissible_radius() {
                        return Err(Error::Inadmissible {
                            index: offset + i,
                            distance: d,
                        });
                    }
                    Ok(space.to_unit_metric(d))
                })
                .collect()
        };
        match &self.form {
            Form::Sum {
                profile,
                anchors,
                weights,
            } => {
                let s = unit_distances(anchors)?;
                Ok(s.iter()
                    .zip(weights)
                    .map(|(s, w)| match profile {
                        Profile::Cosine => w * (1.0 - s.cos()),
                        Profile::TanSin => w * s.tan() * s.sin(),
                    })
                    .sum())
            }
            Form::Max { anchors, weights } => {
                let s = unit_distances(anchors)?;
                Ok(s.iter()
                    .zip(weights)
                    .map(|(s, w)| w * (1.0 - s.cos()))
                    .fold(f64::NEG_INFINITY, f64::max))
            }
            Form::Constant(v) => {
                space.check_point(y)?;
                Ok(*v)
            }
            Form::Combination(terms) => {
                let mut total = 0.0;
                let mut offset = offset;
                for (c, f) in terms {
                    total += c * f.evaluate_from(y, space, offset)?;
                    offset += f.anchors().len();
                }
                Ok(total)
            }
            Form::Negated(inner) => Ok(-inner.evaluate_from(y, space, offset)?),
        }
    }

    /// Euclidean gradient at `y` of the extension of the functional written in
    /// terms of the inner products `<y, p_i>`. Its tangential part is the
    /// Riemannian gradient in the unit metric.
    pub(crate) fn ambient_gradient(&self, y: &SpherePoint) -> Result<Vec<f64>> {
        let mut g = vec![0.0; y.ambient_dim()];
        self.accumulate_gradient(y, 1.0, &mut g)?;
        Ok(g)
    }

    fn accumulate_gradient(&self, y: &SpherePoint, scale: f64, g: &mut [f64]) -> Result<()> {
        match &self.form {
            Form::Sum {
                profile,
                anchors,
                weights,
            } => {
                for (a, w) in anchors.iter().zip(weights) {
                    let coef = match profile {
                        Profile::Cosine => -w,
                        Profile::TanSin => {
                            let c = y.dot(a);
                            -w * (1.0 + 1.0 / (c * c))
                        }
                    };
                    g.iter_mut()
                        .zip(a.coords())
                        .for_each(|(gi, ai)| *gi += scale * coef * ai);
                }
                Ok(())
            }
            Form::Max { anchors, weights } if anchors.len() == 1 => {
                g.iter_mut()
                    .zip(anchors[0].coords())
                    .for_each(|(gi, ai)| *gi -= scale * weights[0] * ai);
                Ok(())
            }
            Form::Max { .. } => Err(Error::NonSmooth),
            Form::Constant(_) => Ok(()),
            Form::Combination(terms) => {
                for (c, f) in terms {
                    f.accumulate_gradient(y, scale * c, g)?;
                }
                Ok(())
            }
            Form::Negated(inner) => inner.accumulate_gradient(y, -scale, g),
        }
    }

    /// Riemannian gradient at `y` in the unit metric.
    pub fn gradient(&self, y: &SpherePoint, space: &ModelSpace) -> Result<Vec<f64>> {
        self.check_domain(y, space)?;
        Ok(y.project_tangent(&self.ambient_gradient(y)?))
    }

    /// Upper bound on the unit-metric Lipschitz constant over points whose
    /// anchor distances (unit metric) stay below `max_anchor_distance`.
    pub fn lipschitz_bound(&self, max_anchor_distance: f64) -> f64 {
        let t = max_anchor_distance.min(FRAC_PI_2 - 1e-9);
        match &self.form {
            Form::Sum {
                profile: Profile::Cosine,
                weights,
                ..
            } => weights.iter().sum(),
            Form::Sum {
                profile: Profile::TanSin,
                weights,
                ..
            } => weights.iter().sum::<f64>() * PenaltyKernel.derivative(t).unwrap_or(f64::INFINITY),
            Form::Max { weights, .. } => weights.iter().cloned().fold(0.0, f64::max),
            Form::Constant(_) => 0.0,
            Form::Combination(terms) => terms
                .iter()
                .map(|(c, f)| c * f.lipschitz_bound(max_anchor_distance))
                .sum(),
            Form::Negated(inner) => inner.lipschitz_bound(max_anchor_distance),
        }
    }
}

/// Samples `f` at `samples` equally spaced parameters of `g`, endpoints included.
pub fn geodesic_restriction(
    f: &ConvexFunctional,
    g: &Geodesic,
    space: &ModelSpace,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be positive".into()));
    }
    (0..samples)
        .map(|i| {
            let t = if samples == 1 {
                0.0
            } else {
                g.length() * i as f64 / (samples - 1) as f64
            };
            Ok((t, f.evaluate(&g.at(t)?, space)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    pub passed: bool,
    /// Largest observed `f(a x (+) (1-a) y) - (a f(x) + (1-a) f(y))`.
    pub worst_violation: f64,
    pub trials: usize,
}

/// Cap (center, unit-metric radius) on which random convexity trials are drawn.
pub fn sampling_cap(f: &ConvexFunctional, fallback: &SpherePoint) -> (SpherePoint, f64) {
    match f.anchor_centroid() {
        Some(c) => {
            let spread = f.anchors().iter().map(|a| c.angle(a)).fold(0.0, f64::max);
            (c, 0.9 * (FRAC_PI_2 - spread).max(0.0))
        }
        None => (fallback.clone(), FRAC_PI_2 / 2.0),
    }
}

/// Randomized check of the geodesic convexity inequality on `trials` seeded
/// random pairs inside the admissible region of `f`.
pub fn certify_convexity(
    f: &ConvexFunctional,
    space: &ModelSpace,
    trials: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let mut rng = sampling::seeded(seed);
    let fallback = sampling::uniform_sphere(&mut rng, space.dim());
    let (center, radius) = sampling_cap(f, &fallback);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let x = sampling::in_cap(&mut rng, &center, radius);
        let y = sampling::in_cap(&mut rng, &center, radius);
        let alpha: f64 = rng.random_range(1e-3..1.0 - 1e-3);
        let z = space.convex_combination(&x, &y, alpha)?;
        let v = f.evaluate(&z, space)? - (alpha * f.evaluate(&x, space)? + (1.0 - alpha) * f.evaluate(&y, space)?);
        worst = worst.max(v);
    }
    Ok(ConvexityReport {
        passed: worst <= CONVEXITY_TOL,
        worst_violation: worst,
        trials,
    })
}

/// Directional derivative of `f` at `y` along the unit tangent `u`, by central
/// differences with step `h` (unit metric).
pub fn directional_derivative_fd(
    f: impl Fn(&SpherePoint) -> Result<f64>,
    y: &SpherePoint,
    u: &[f64],
    h: f64,
) -> Result<f64> {
    let plus = f(&y.walk(u, h))?;
    let minus = f(&y.walk(u, -h))?;
    Ok((plus - minus) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dot;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn p(c: &[f64]) -> SpherePoint {
        SpherePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty(0.0).unwrap(), 0.0);
        assert!((penalty(FRAC_PI_4).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        // oracle: t^2 + t^4/6 + 31 t^6/360 from the series of sec t - cos t
        let series = 0.01 + 1e-4 / 6.0 + 31.0 / 360.0 * 1e-6;
        assert!((penalty(0.1).unwrap() - series).abs() < 1e-9);
        assert!((penalty(0.1).unwrap() - 0.010017).abs() < 1e-6);
        assert!(matches!(penalty(FRAC_PI_2), Err(Error::PenaltyDomain(_))));
        assert!(penalty(-0.1).is_err());
    }

    #[test]
    fn penalty_inverse_and_derivative() {
        for t in [0.0, 0.01, 0.4, 1.2, 1.5] {
            let v = penalty(t).unwrap();
            assert!((PenaltyKernel.inverse(v) - t).abs() < 1e-9);
        }
        let h = 1e-6;
        let t = 0.7;
        let fd = (penalty(t + h).unwrap() - penalty(t - h).unwrap()) / (2.0 * h);
        assert!((PenaltyKernel.derivative(t).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn evaluate_examples() {
        let s = ModelSpace::sphere(2);
        let anchor = p(&[0.0, 0.0, 1.0]);
        let f = ConvexFunctional::cosine_mean(vec![anchor.clone()], vec![1.0], &s).unwrap();
        assert_eq!(f.evaluate(&anchor, &s).unwrap(), 0.0);
        let y = p(&[FRAC_PI_3.sin(), 0.0, FRAC_PI_3.cos()]);
        assert!((f.evaluate(&y, &s).unwrap() - 0.5).abs() < 1e-15);

        // two anchors at 0.4 and 0.7 from y, independent scalar computation
        let y = p(&[1.0, 0.0, 0.0]);
        let a1 = p(&[0.4f64.cos(), 0.4f64.sin(), 0.0]);
        let a2 = p(&[0.7f64.cos(), 0.0, 0.7f64.sin()]);
        let f = ConvexFunctional::tan_sin_sum(vec![a1, a2], vec![1.0, 2.0], &s).unwrap();
        let expect = 0.4f64.tan() * 0.4f64.sin() + 2.0 * 0.7f64.tan() * 0.7f64.sin();
        assert!((f.evaluate(&y, &s).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn evaluate_reports_offending_anchor() {
        let s = ModelSpace::sphere(2);
        let a = p(&[1.0, 0.0, 0.0]);
        let b = p(&[0.9, 0.3, 0.0]);
        let f = ConvexFunctional::cosine_mean(vec![a, b], vec![1.0, 1.0], &s).unwrap();
        let y = p(&[-0.05, -1.0, 0.0]);
        match f.evaluate(&y, &s) {
            Err(Error::Inadmissible { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected inadmissible, got {other:?}"),
        }
    }

    #[test]
    fn construction_errors() {
        let s = ModelSpace::sphere(2);
        let a = p(&[1.0, 0.0, 0.0]);
        let b = p(&[0.0, 1.0, 0.0]);
        assert!(ConvexFunctional::cosine_mean(vec![], vec![], &s).is_err());
        assert!(ConvexFunctional::cosine_mean(vec![a.clone()], vec![0.0], &s).is_err());
        assert!(ConvexFunctional::cosine_mean(vec![a.clone()], vec![1.0, 2.0], &s).is_err());
        assert!(ConvexFunctional::tan_sin_sum(vec![a.clone(), b], vec![1.0, 1.0], &s).is_err());
        assert!(ConvexFunctional::cosine_mean(vec![p(&[1.0, 0.0])], vec![1.0], &s).is_err());
    }

    #[test]
    fn combination_offsets_anchor_indices() {
        let s = ModelSpace::sphere(2);
        let f1 = ConvexFunctional::cosine_mean(vec![p(&[1.0, 0.0, 0.0])], vec![1.0], &s).unwrap();
        let f2 = ConvexFunctional::tan_sin_sum(vec![p(&[1.0, 0.2, 0.0])], vec![1.0], &s).unwrap();
        let f = ConvexFunctional::combination(vec![(0.5, f1.clone()), (2.0, f2.clone())], &s).unwrap();
        assert_eq!(f.kind(), FunctionalKind::CustomCombination);
        let y = p(&[1.0, 0.1, 0.1]);
        let expect = 0.5 * f1.evaluate(&y, &s).unwrap() + 2.0 * f2.evaluate(&y, &s).unwrap();
        assert!((f.evaluate(&y, &s).unwrap() - expect).abs() < 1e-15);
        let far = p(&[-0.1, 0.0, 1.0]);
        assert!(f.evaluate(&far, &s).is_err());
    }

    #[test]
    fn restriction_examples() {
        let s = ModelSpace::sphere(2);
        let g = s.geodesic(&p(&[1.0, 0.0, 0.0]), &p(&[0.8, 0.6, 0.0])).unwrap();
        let c = ConvexFunctional::constant(3.0);
        let vals = geodesic_restriction(&c, &g, &s, 7).unwrap();
        assert!(vals.iter().all(|(_, v)| *v == 3.0));

        let f = ConvexFunctional::cosine_mean(vec![p(&[0.5, 0.2, 0.8])], vec![1.0], &s).unwrap();
        let two = geodesic_restriction(&f, &g, &s, 2).unwrap();
        assert_eq!(two[0], (0.0, f.evaluate(g.start(), &s).unwrap()));
        assert_eq!(two[1].1, f.evaluate(g.end(), &s).unwrap());
        let three = geodesic_restriction(&f, &g, &s, 3).unwrap();
        assert!(three[1].1 <= 0.5 * (three[0].1 + three[2].1));
        assert!(geodesic_restriction(&f, &g, &s, 0).is_err());
    }

    #[test]
    fn certifier_examples() {
        let s = ModelSpace::sphere(2);
        let anchors = vec![p(&[1.0, 0.1, 0.0]), p(&[1.0, -0.2, 0.3]), p(&[0.9, 0.0, -0.3])];
        let f = ConvexFunctional::cosine_mean(anchors.clone(), vec![1.0, 2.0, 0.5], &s).unwrap();
        assert!(certify_convexity(&f, &s, 2000, 1).unwrap().passed);

        let concave =
            ConvexFunctional::negated(ConvexFunctional::cosine_mean(vec![anchors[0].clone()], vec![1.0], &s).unwrap());
        assert!(!concave.is_certified_convex());
        let r = certify_convexity(&concave, &s, 200, 2).unwrap();
        assert!(!r.passed && r.worst_violation > 0.0);

        let r = certify_convexity(&ConvexFunctional::constant(1.5), &s, 100, 3).unwrap();
        assert!(r.passed && r.worst_violation.abs() < 1e-15);
        assert!(certify_convexity(&f, &s, 0, 0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = ModelSpace::new(2, 2.25).unwrap();
        let anchors = vec![p(&[1.0, 0.1, 0.0]), p(&[1.0, -0.2, 0.3])];
        let y = p(&[1.0, 0.05, 0.1]);
        for f in [
            ConvexFunctional::cosine_mean(anchors.clone(), vec![1.0, 2.0], &s).unwrap(),
            ConvexFunctional::tan_sin_sum(anchors.clone(), vec![1.0, 2.0], &s).unwrap(),
        ] {
            let g = f.gradient(&y, &s).unwrap();
            for u in y.tangent_basis() {
                let fd = directional_derivative_fd(|q| f.evaluate(q, &s), &y, &u, 1e-6).unwrap();
                assert!((dot(&g, &u) - fd).abs() < 1e-7, "{} vs {fd}", dot(&g, &u));
            }
        }
        let m = ConvexFunctional::max_cosine(anchors, vec![1.0, 1.0], &s).unwrap();
        assert!(matches!(m.gradient(&y, &s), Err(Error::NonSmooth)));
    }
}
