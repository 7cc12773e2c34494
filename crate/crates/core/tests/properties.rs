mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use geoprox::functionals::{penalty, PenaltyKernel};
use geoprox::oracle::cosine_mean_argmin;
use geoprox::ppa::{FEJER_TOL, MONOTONE_TOL};
use geoprox::resolvent::{
    check_fejer_inequality, check_first_inequality, check_resolvent_inequality, ResolventSample, INEQUALITY_TOL,
};
use geoprox::sampling::{in_cap, seeded, uniform_sphere};
use geoprox::{resolve, run_ppa, ConvexFunctional, InnerSolverConfig, ModelSpace, RunConfig, StepSchedule};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(3), Just(4)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_axioms(seed in any::<u64>(), dim in dims(), kappa in 0.25f64..9.0) {
        let s = ModelSpace::new(dim, kappa).unwrap();
        let mut rng = seeded(seed);
        let (x, y, z) = (uniform_sphere(&mut rng, dim), uniform_sphere(&mut rng, dim), uniform_sphere(&mut rng, dim));
        let dxy = s.distance(&x, &y).unwrap();
        prop_assert_eq!(s.distance(&x, &x).unwrap(), 0.0);
        prop_assert!((dxy - s.distance(&y, &x).unwrap()).abs() < 1e-15);
        prop_assert!(dxy <= s.distance(&x, &z).unwrap() + s.distance(&z, &y).unwrap() + 1e-14);
        prop_assert!(dxy <= std::f64::consts::PI / s.sqrt_kappa() + 1e-14);
    }

    #[test]
    fn geodesic_consistency(seed in any::<u64>(), dim in dims(), t in 0.0f64..1.0, kappa in 0.25f64..9.0) {
        let s = ModelSpace::new(dim, kappa).unwrap();
        let mut rng = seeded(seed);
        let x = uniform_sphere(&mut rng, dim);
        let y = in_cap(&mut rng, &x, 3.0);
        prop_assume!(x.angle(&y) > 1e-6);
        let len = s.distance(&x, &y).unwrap();
        let g = s.geodesic(&x, &y).unwrap();
        let m = g.at(t * len).unwrap();
        prop_assert!((s.distance(&x, &m).unwrap() - t * len).abs() < 1e-12);
        prop_assert!((s.distance(&m, &y).unwrap() - (1.0 - t) * len).abs() < 1e-12);
        let c = s.convex_combination(&x, &y, 1.0 - t).unwrap();
        prop_assert!(c.angle(&m) < 1e-12);
    }

    #[test]
    fn comparison_lemmas(seed in any::<u64>(), dim in dims(), alpha in 0.0f64..=1.0) {
        let s = ModelSpace::sphere(dim);
        let mut rng = seeded(seed);
        let c = uniform_sphere(&mut rng, dim);
        let pts: Vec<_> = (0..3).map(|_| in_cap(&mut rng, &c, FRAC_PI_4 * 0.999)).collect();
        let r = s.comparison_inequalities(&pts[0], &pts[1], &pts[2], alpha).unwrap();
        prop_assert!(r.all_hold(1e-10), "{:?}", r);
    }

    #[test]
    fn penalty_is_increasing_and_convex(a in 0.0f64..1.5, b in 0.0f64..1.5, w in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(penalty(lo).unwrap() <= penalty(hi).unwrap());
        let mid = penalty(w * lo + (1.0 - w) * hi).unwrap();
        prop_assert!(mid <= w * penalty(lo).unwrap() + (1.0 - w) * penalty(hi).unwrap() + 1e-12);
        let v = penalty(hi).unwrap();
        prop_assert!((PenaltyKernel.inverse(v) - hi).abs() < 1e-7);
    }

    #[test]
    fn penalty_maclaurin_bound(t in 0.0f64..=0.5) {
        prop_assert!((penalty(t).unwrap() - t * t).abs() <= t.powi(4));
    }

    #[test]
    fn curvature_covariance(seed in any::<u64>(), kappa in 0.25f64..9.0) {
        let s1 = ModelSpace::sphere(2);
        let sk = ModelSpace::new(2, kappa).unwrap();
        let mut rng = seeded(seed);
        let c = uniform_sphere(&mut rng, 2);
        let anchors: Vec<_> = (0..3).map(|_| in_cap(&mut rng, &c, 0.5)).collect();
        let y = in_cap(&mut rng, &c, 0.5);
        prop_assert!((sk.distance(&c, &y).unwrap() * kappa.sqrt() - s1.distance(&c, &y).unwrap()).abs() < 1e-14);
        let f1 = ConvexFunctional::tan_sin_sum(anchors.clone(), vec![1.0, 2.0, 0.5], &s1).unwrap();
        let fk = ConvexFunctional::tan_sin_sum(anchors, vec![1.0, 2.0, 0.5], &sk).unwrap();
        prop_assert!((f1.evaluate(&y, &s1).unwrap() - fk.evaluate(&y, &sk).unwrap()).abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn resolvent_inequalities(seed in any::<u64>(), lambda in 0.1f64..5.0, mu in 0.1f64..5.0, tan_sin in any::<bool>()) {
        let s = ModelSpace::sphere(2);
        let mut rng = seeded(seed);
        let c = uniform_sphere(&mut rng, 2);
        let anchors: Vec<_> = (0..3).map(|_| in_cap(&mut rng, &c, 0.3)).collect();
        let f = if tan_sin {
            ConvexFunctional::tan_sin_sum(anchors, vec![1.0, 1.0, 1.0], &s).unwrap()
        } else {
            ConvexFunctional::cosine_mean(anchors, vec![1.0, 1.0, 1.0], &s).unwrap()
        };
        let x = in_cap(&mut rng, &c, 0.9);
        let y = in_cap(&mut rng, &c, 0.9);
        let cfg = InnerSolverConfig::default();
        let rx = resolve(&f, lambda, &x, &s, &cfg).unwrap();
        let ry = resolve(&f, mu, &y, &s, &cfg).unwrap();
        prop_assert!(rx.c_value > 0.0);
        prop_assert!(f.evaluate(&rx.point, &s).unwrap() <= f.evaluate(&x, &s).unwrap() + 1e-12);
        let sx = ResolventSample { eta: lambda, z: &x, result: &rx };
        let sy = ResolventSample { eta: mu, z: &y, result: &ry };
        prop_assert!(check_first_inequality(&f, sx, sy, &s).unwrap().holds(INEQUALITY_TOL));
        prop_assert!(check_first_inequality(&f, sy, sx, &s).unwrap().holds(INEQUALITY_TOL));
        prop_assert!(check_resolvent_inequality(sx, sy, &s).unwrap().holds(INEQUALITY_TOL));
        if let Some(u) = cosine_mean_argmin(&f) {
            prop_assert!(check_fejer_inequality(&f, sx, &u, &s).unwrap().holds(INEQUALITY_TOL));
        }
    }

    #[test]
    fn ppa_invariants(seed in any::<u64>(), lambda in 0.2f64..4.0, dim in dims()) {
        let s = ModelSpace::sphere(dim);
        let mut rng = seeded(seed);
        let c = uniform_sphere(&mut rng, dim);
        let anchors: Vec<_> = (0..4).map(|_| in_cap(&mut rng, &c, 0.4)).collect();
        let f = ConvexFunctional::cosine_mean(anchors, vec![1.0, 0.5, 2.0, 1.0], &s).unwrap();
        let u = cosine_mean_argmin(&f).unwrap();
        let x1 = in_cap(&mut rng, &c, FRAC_PI_2 - 0.45);
        let cfg = RunConfig { reference_minimizer: Some(u.clone()), ..RunConfig::iterations(25) };
        let trace = run_ppa(&f, &x1, &StepSchedule::Constant(lambda), &s, &cfg, &InnerSolverConfig::default()).unwrap();
        prop_assert!(trace.objective_monotone(MONOTONE_TOL));
        prop_assert!(trace.fejer_toward(&u, FEJER_TOL).unwrap());
        prop_assert!(trace.step_distances.iter().all(|d| *d < FRAC_PI_2));
        let fu = f.evaluate(&u, &s).unwrap();
        prop_assert!(trace.rate_certified(&u, fu, 1e-8).unwrap());
    }
}
