#![allow(dead_code)]

use geoprox::{ConvexFunctional, ModelSpace, SpherePoint};

pub fn p(c: &[f64]) -> SpherePoint {
    SpherePoint::new(c.to_vec()).unwrap()
}

/// Point at polar angle `theta` and azimuth `az` around the north pole of `S^2`.
pub fn polar(theta: f64, az: f64) -> SpherePoint {
    p(&[theta.sin() * az.cos(), theta.sin() * az.sin(), theta.cos()])
}

/// Three anchors roughly 0.5 rad apart.
pub fn three_anchors() -> Vec<SpherePoint> {
    vec![polar(0.3, 0.1), polar(0.28, 2.2), polar(0.32, 4.3)]
}

pub fn three_anchor_problem() -> (ModelSpace, ConvexFunctional, SpherePoint) {
    let s = ModelSpace::sphere(2);
    let f = ConvexFunctional::cosine_mean(three_anchors(), vec![1.0, 1.0, 1.0], &s).unwrap();
    (s, f, polar(1.0, 0.7))
}
