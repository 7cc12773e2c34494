//! Seeded random points for property suites and sweeps.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{norm, SpherePoint};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed point of `S^dim`.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> SpherePoint {
    loop {
        let v: Vec<f64> = (0..=dim).map(|_| rng.sample(StandardNormal)).collect();
        if norm(&v) > 1e-6 {
            return SpherePoint::new(v).expect("finite nonzero vector");
        }
    }
}

/// Unit tangent vector at `p` with uniformly random direction.
pub fn tangent_direction<R: Rng + ?Sized>(rng: &mut R, p: &SpherePoint) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..p.ambient_dim()).map(|_| rng.sample(StandardNormal)).collect();
        let t = p.project_tangent(&v);
        let n = norm(&t);
        if n > 1e-6 {
            return t.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Random point within unit-metric distance `radius` of `center`.
///
/// The distance is drawn as `radius * sqrt(u)`, which is area-uniform in the
/// flat limit and close to it for the small caps used here.
pub fn in_cap<R: Rng + ?Sized>(rng: &mut R, center: &SpherePoint, radius: f64) -> SpherePoint {
    let u = tangent_direction(rng, center);
    let r = radius * rng.random::<f64>().sqrt();
    center.walk(&u, r)
}

/// Log-uniform sample from `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}
