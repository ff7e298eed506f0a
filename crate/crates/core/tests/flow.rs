use std::f64::consts::PI;

use geolyap_core::flow::*;
use geolyap_core::manifold::sampling::{random_point_in_ball, random_point_in_shell, random_tangent, random_unit_tangent, seeded_rng};
use geolyap_core::manifold::{distance, exp_map, ManifoldKind, ManifoldPoint, TangentVector};
use geolyap_core::systems;
use geolyap_core::Error;

fn euclid(c: &[f64]) -> ManifoldPoint {
    ManifoldPoint::new(ManifoldKind::Euclidean(c.len()), c.to_vec()).unwrap()
}

fn linear_decay(n: usize) -> TimeVaryingField {
    let origin = ManifoldPoint::origin(ManifoldKind::Euclidean(n));
    systems::geodesic_attractor(&origin, 1.0).unwrap()
}

fn north() -> ManifoldPoint {
    ManifoldPoint::origin(ManifoldKind::Sphere(2))
}

fn sphere_attractor() -> TimeVaryingField {
    systems::geodesic_attractor(&north(), 1.0).unwrap()
}

const STEP: f64 = 1e-3;

#[test]
fn zero_field_gives_constant_trajectory() {
    let f = systems::zero(ManifoldKind::Sphere(2));
    let x0 = ManifoldPoint::new(ManifoldKind::Sphere(2), vec![0.6, 0.0, 0.8]).unwrap();
    let tr = flow(&f, 0.0, &x0, 1.0, STEP).unwrap();
    assert!(tr.points().all(|x| x == &x0));
    assert_eq!(tr.samples.last().unwrap().0, 1.0);
}

#[test]
fn linear_decay_matches_exponential() {
    let f = linear_decay(2);
    let tr = flow(&f, 0.0, &euclid(&[1.0, 0.0]), 1.0, STEP).unwrap();
    let end = tr.last().coords();
    assert!((end[0] - (-1f64).exp()).abs() < 1e-8 && end[1] == 0.0);
    // Strictly increasing times ending exactly at t1.
    assert!(tr.samples.windows(2).all(|w| w[1].0 > w[0].0));
    assert_eq!(tr.samples.last().unwrap().0, 1.0);
}

#[test]
fn last_step_is_shortened() {
    let f = linear_decay(1);
    let tr = flow(&f, 0.0, &euclid(&[1.0]), 0.35, 0.1).unwrap();
    let times: Vec<f64> = tr.times().collect();
    assert_eq!(times.len(), 5);
    assert_eq!(*times.last().unwrap(), 0.35);
    assert!((times[3] - 0.3).abs() < 1e-15);
}

#[test]
fn sphere_attractor_distance_decays_exponentially() {
    let f = sphere_attractor();
    let x_star = north();
    let mut rng = seeded_rng(1);
    let x0 = random_point_in_shell(&x_star, 1.0, 1.0, &mut rng);
    assert!((distance(&x0, &x_star).unwrap() - 1.0).abs() < 1e-14);
    let x1 = flow_endpoint(&f, 0.0, &x0, 1.0, STEP).unwrap();
    assert!((distance(&x1, &x_star).unwrap() - (-1f64).exp()).abs() < 1e-6);
}

#[test]
fn integrator_is_fourth_order() {
    let f = time_varying_sphere();
    let x_star = north();
    let x0 = random_point_in_shell(&x_star, 2.0, 2.0, &mut seeded_rng(9));
    // d' = -(1.5 + 0.5 sin t) d has the closed form below.
    let t1: f64 = 2.0;
    let exact = 2.0 * (-(1.5 * t1 + 0.5 * (1.0 - t1.cos()))).exp();
    let err = |h: f64| (distance(&flow_endpoint(&f, 0.0, &x0, t1, h).unwrap(), &x_star).unwrap() - exact).abs();
    let ratio = err(0.1) / err(0.05);
    assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
}

fn time_varying_sphere() -> TimeVaryingField {
    systems::time_varying_attractor(&north(), 1.5, 0.5).unwrap()
}

#[test]
fn integrator_order_on_so3_and_hyperbolic() {
    for kind in [ManifoldKind::So3, ManifoldKind::Hyperbolic2] {
        let x_star = ManifoldPoint::origin(kind);
        let f = systems::time_varying_attractor(&x_star, 1.5, 0.5).unwrap();
        let x0 = random_point_in_shell(&x_star, 1.5, 1.5, &mut seeded_rng(4));
        let t1: f64 = 2.0;
        let exact = 1.5 * (-(1.5 * t1 + 0.5 * (1.0 - t1.cos()))).exp();
        let err = |h: f64| (distance(&flow_endpoint(&f, 0.0, &x0, t1, h).unwrap(), &x_star).unwrap() - exact).abs();
        let ratio = err(0.1) / err(0.05);
        assert!((8.0..=32.0).contains(&ratio), "{kind}: ratio {ratio}");
    }
}

#[test]
fn equilibrium_is_invariant() {
    for kind in [ManifoldKind::Euclidean(3), ManifoldKind::Sphere(2), ManifoldKind::So3, ManifoldKind::Hyperbolic2] {
        let x_star = random_point_in_ball(&ManifoldPoint::origin(kind), 1.0, &mut seeded_rng(2));
        for f in [
            systems::time_varying_attractor(&x_star, 1.5, 0.5).unwrap(),
            systems::isometric_rotation(&x_star, 1.0).unwrap(),
            systems::cubic_slowdown(&x_star, 1.0).unwrap(),
        ] {
            let tr = flow(&f, 0.0, &x_star, 10.0, 1e-2).unwrap();
            let worst = tr.points().map(|x| distance(x, &x_star).unwrap()).fold(0.0, f64::max);
            assert!(worst < 1e-9, "{kind} {}: {worst}", f.name());
        }
    }
}

#[test]
fn rotation_conserves_distance() {
    for kind in [ManifoldKind::Euclidean(2), ManifoldKind::Sphere(2), ManifoldKind::So3, ManifoldKind::Hyperbolic2] {
        let x_star = random_point_in_ball(&ManifoldPoint::origin(kind), 1.0, &mut seeded_rng(12));
        let f = systems::isometric_rotation(&x_star, 1.0).unwrap();
        let x0 = random_point_in_shell(&x_star, 1.0, 1.0, &mut seeded_rng(13));
        let x1 = flow_endpoint(&f, 0.0, &x0, 5.0, STEP).unwrap();
        assert!((distance(&x1, &x_star).unwrap() - 1.0).abs() < 1e-9, "{kind}");
        assert!(distance(&x1, &x0).unwrap() > 0.1, "{kind}: field does not move points");
    }
}

#[test]
fn trajectory_steps_respect_reachability() {
    let f = time_varying_sphere();
    let x0 = random_point_in_shell(&north(), 2.5, 2.5, &mut seeded_rng(3));
    let tr = flow(&f, 0.0, &x0, 2.0, 1e-2).unwrap();
    assert!(tr.reachability_ratio(&f).unwrap() <= 1.0 + 1e-6);
    assert!(tr.points().all(|x| x.constraint_residual() < 1e-12));
}

#[test]
fn semigroup_residual_is_small() {
    let f = linear_decay(2);
    let x0 = euclid(&[1.0, -0.5]);
    assert_eq!(semigroup_residual(&f, 0.0, &x0, 0.0, 1.0, STEP).unwrap(), 0.0);
    assert_eq!(semigroup_residual(&f, 0.0, &x0, 1.0, 1.0, STEP).unwrap(), 0.0);
    assert!(semigroup_residual(&f, 0.0, &x0, 0.5, 1.0, STEP).unwrap() < 1e-9);
    assert!(semigroup_residual(&f, 0.0, &x0, 1.5, 1.0, STEP).is_err());

    let f = time_varying_sphere();
    let mut rng = seeded_rng(21);
    for i in 0..100 {
        let x0 = random_point_in_ball(&north(), 2.5, &mut rng);
        let t0 = 0.1 * i as f64;
        let t_mid = t0 + 0.0173 * (i % 57) as f64;
        let r = semigroup_residual(&f, t0, &x0, t_mid, t0 + 1.0, STEP).unwrap();
        assert!(r < 1e-7, "{r}");
    }
}

#[test]
fn pushforward_examples() {
    let f = linear_decay(2);
    let x = euclid(&[0.3, 0.4]);
    let z = pushforward(&f, 0.0, &x, &TangentVector::zero(&x), 1.0, STEP).unwrap();
    assert_eq!(z.norm(), 0.0);
    let v = TangentVector::new(&x, vec![1.0, 2.0]).unwrap();
    let same = pushforward(&f, 0.5, &x, &v, 0.5, STEP).unwrap();
    assert_eq!(same.components(), v.components());
    let p = pushforward(&f, 0.0, &x, &v, 1.0, STEP).unwrap();
    let e = (-1f64).exp();
    assert!((p.components()[0] - e).abs() < 1e-5 && (p.components()[1] - 2.0 * e).abs() < 1e-5);
    assert!(pushforward(&f, 1.0, &x, &v, 0.0, STEP).is_err());
}

#[test]
fn pushforward_obeys_growth_bound() {
    for kind in [ManifoldKind::Sphere(2), ManifoldKind::So3, ManifoldKind::Hyperbolic2] {
        let x_star = ManifoldPoint::origin(kind);
        let f = systems::time_varying_attractor(&x_star, 1.5, 0.5).unwrap();
        let region = Region::new(x_star.clone(), 1.0).unwrap();
        let l = lipschitz_estimate(&f, &region, &[0.0, 0.7, 1.9, 3.1], 400, 7).unwrap().safe_value();
        let mut rng = seeded_rng(8);
        for _ in 0..100 {
            let x = random_point_in_ball(&x_star, 1.0, &mut rng);
            let v = random_unit_tangent(&x, &mut rng);
            let tau = 0.5;
            let p = pushforward(&f, 0.0, &x, &v, tau, 1e-2).unwrap();
            assert!(p.norm() <= (l * tau).exp() * (1.0 + 1e-3), "{kind}");
        }
        let _ = TangentVector::zero(&x_star);
    }
}

/// Pushforward of the sphere attractor from the pole: the flow is the dilation
/// `exp(e^{-s} v)` in normal coordinates, so pushforwards at the pole scale by `e^{-s}`.
#[test]
fn pushforward_at_equilibrium_is_scaling() {
    let f = sphere_attractor();
    let x = north();
    let v = TangentVector::new(&x, vec![0.3, -0.4, 0.0]).unwrap();
    let p = pushforward(&f, 0.0, &x, &v, 2.0, STEP).unwrap();
    assert!((p.norm() - 0.5 * (-2f64).exp()).abs() < 1e-8);
}

#[test]
fn lipschitz_examples() {
    let z = systems::zero(ManifoldKind::Sphere(2));
    let est = lipschitz_estimate(&z, &Region::new(north(), 1.0).unwrap(), &[0.0], 50, 1).unwrap();
    assert_eq!((est.l_transport, est.l_covariant), (0.0, 0.0));

    let f = linear_decay(3);
    let origin = ManifoldPoint::origin(ManifoldKind::Euclidean(3));
    let est = lipschitz_estimate(&f, &Region::new(origin, 2.0).unwrap(), &[0.0], 50, 1).unwrap();
    assert!((est.l_transport - 1.0).abs() < 0.02 && (est.l_covariant - 1.0).abs() < 0.02);
}

/// The sphere attractor's covariant derivative is minus the Hessian of `d^2/2`:
/// eigenvalue 1 radially and `d cot d` tangentially. An independent finite
/// difference of the ambient field, projected, recovers the same operator norm.
#[test]
fn sphere_attractor_lipschitz_constant() {
    let f = sphere_attractor();
    let est = lipschitz_estimate(&f, &Region::new(north(), 1.0).unwrap(), &[0.0], 500, 3).unwrap();
    let mut oracle = 0.0_f64;
    let mut rng = seeded_rng(4);
    for _ in 0..500 {
        let x = random_point_in_ball(&north(), 1.0, &mut rng);
        let v = random_unit_tangent(&x, &mut rng);
        let h = 1e-6;
        let xp = exp_map(&x, &v.scale(h)).unwrap();
        let xm = exp_map(&x, &v.scale(-h)).unwrap();
        let fp = f.eval(0.0, &xp).unwrap();
        let fm = f.eval(0.0, &xm).unwrap();
        let xc = x.coords();
        let mut d: Vec<f64> = fp.components().iter().zip(fm.components()).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let dot: f64 = d.iter().zip(xc).map(|(a, b)| a * b).sum();
        d.iter_mut().zip(xc).for_each(|(a, b)| *a -= dot * b);
        oracle = oracle.max(d.iter().map(|a| a * a).sum::<f64>().sqrt());
    }
    assert!((oracle - 1.0).abs() < 0.05);
    assert!((est.value() - oracle).abs() < 0.05 * oracle, "{} vs {oracle}", est.value());
    assert!(est.l_transport <= est.l_covariant * 1.02);
}

#[test]
fn lipschitz_region_is_validated() {
    assert!(Region::new(north(), PI).is_err());
    assert!(Region::new(north(), 0.0).is_err());
    let f = sphere_attractor();
    let r = Region::new(north(), 1.0).unwrap();
    assert!(lipschitz_estimate(&f, &r, &[0.0], 0, 1).is_err());
}

#[test]
fn contraction_envelope_examples() {
    let f = linear_decay(2);
    let x = euclid(&[1.0, 1.0]);
    let grid: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
    let same = contraction_envelope_check(&f, 1.0, &x, &x, 0.0, &grid, STEP).unwrap();
    assert!(same.pass);
    let rep = contraction_envelope_check(&f, 1.0, &x, &euclid(&[-0.5, 2.0]), 0.0, &grid, STEP).unwrap();
    assert!(rep.pass);
    // The ratio sits on the lower envelope.
    for s in &rep.samples {
        assert!((s.distance / s.lower - 1.0).abs() < 1e-9);
    }

    let f = sphere_attractor();
    let l = lipschitz_estimate(&f, &Region::new(north(), 1.0).unwrap(), &[0.0], 400, 5).unwrap().safe_value();
    let mut rng = seeded_rng(6);
    for _ in 0..100 {
        let a = random_point_in_ball(&north(), 1.0, &mut rng);
        let b = random_point_in_ball(&north(), 1.0, &mut rng);
        let rep = contraction_envelope_check(&f, l, &a, &b, 0.0, &grid, 1e-2).unwrap();
        assert!(rep.pass && rep.cut_locus_times.is_empty());
    }
}

#[test]
fn distance_rate_matches_finite_difference() {
    for kind in [ManifoldKind::Sphere(2), ManifoldKind::So3, ManifoldKind::Hyperbolic2, ManifoldKind::Euclidean(2)] {
        let x_star = ManifoldPoint::origin(kind);
        let f = systems::isometric_rotation(&x_star, 1.0).unwrap();
        let g = systems::time_varying_attractor(&x_star, 1.5, 0.5).unwrap();
        let mut rng = seeded_rng(14);
        for field in [f, g] {
            for _ in 0..20 {
                let a = random_point_in_ball(&x_star, 1.2, &mut rng);
                let b = random_point_in_ball(&x_star, 1.2, &mut rng);
                let t = 0.4;
                let h = 1e-4;
                let dp = distance(&flow_endpoint(&field, t, &a, t + h, h).unwrap(), &flow_endpoint(&field, t, &b, t + h, h).unwrap()).unwrap();
                let dm = distance(&flow_endpoint(&field, t, &a, t - h, h).unwrap(), &flow_endpoint(&field, t, &b, t - h, h).unwrap()).unwrap();
                let fd = (dp - dm) / (2.0 * h);
                let exact = distance_rate(&field, t, &a, &b).unwrap();
                assert!((fd - exact).abs() < 1e-5, "{kind} {}: {fd} vs {exact}", field.name());
            }
        }
    }
}

#[test]
fn timed_lie_derivative_examples() {
    let f = linear_decay(2);
    let x = euclid(&[1.0, 0.0]);
    let c = timed_lie_derivative(|_, _| Ok(3.0), &f, 1.0, &x, 1e-3).unwrap();
    assert_eq!(c, 0.0);
    let lt = timed_lie_derivative(|t, _| Ok(t), &f, 1.0, &x, 1e-3).unwrap();
    assert!((lt - 1.0).abs() < 1e-12);
    let sq = |_: f64, y: &ManifoldPoint| Ok(y.coords().iter().map(|c| c * c).sum::<f64>());
    let l = timed_lie_derivative(sq, &f, 1.0, &x, 5e-4).unwrap();
    assert!((l + 2.0).abs() < 1e-6);
    // At the time origin the forward difference is used.
    let l0 = timed_lie_derivative(sq, &f, 0.0, &x, 5e-4).unwrap();
    assert!((l0 + 2.0).abs() < 1e-6);
    assert!(timed_lie_derivative(sq, &f, 0.0, &x, 0.0).is_err());
}

#[test]
fn field_errors_carry_time_stamp() {
    let f = sphere_attractor();
    let south = ManifoldPoint::new(ManifoldKind::Sphere(2), vec![0.0, 0.0, -1.0]).unwrap();
    match flow(&f, 0.25, &south, 1.0, STEP) {
        Err(Error::FieldEvaluation { time, .. }) => assert_eq!(time, 0.25),
        other => panic!("unexpected {other:?}"),
    }
    let blowup = TimeVaryingField::new(ManifoldKind::Euclidean(1), "blowup", |_, x| {
        let c = x.coords()[0];
        TangentVector::new(x, vec![c * c])
    });
    match flow(&blowup, 0.0, &euclid(&[1.0]), 5.0, 0.01) {
        Err(Error::FieldEvaluation { .. }) | Err(Error::Integration { .. }) | Err(Error::InvalidTangent { .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        flow(&f, 0.0, &euclid(&[1.0, 0.0, 0.0]), 1.0, STEP),
        Err(Error::KindMismatch { .. })
    ));
    assert!(flow(&f, 0.0, &north(), 1.0, 0.0).is_err());
}

#[test]
fn declared_equilibrium_is_checked() {
    let f = TimeVaryingField::new(ManifoldKind::Euclidean(1), "shift", |_, x| TangentVector::new(x, vec![1.0]));
    assert!(f.with_equilibrium(euclid(&[0.0])).is_err());
}

#[test]
fn trajectory_serialization() {
    let f = sphere_attractor();
    let x0 = random_point_in_ball(&north(), 1.0, &mut seeded_rng(1));
    let tr = flow(&f, 0.0, &x0, 0.05, 0.01).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,x0,x1,x2\n"));
    assert_eq!(text.lines().count(), tr.len() + 1);
    let back: Trajectory = serde_json::from_str(&tr.to_json().unwrap()).unwrap();
    assert_eq!(back.len(), tr.len());
    let _ = random_tangent(&x0, 1.0, &mut seeded_rng(2));
}
