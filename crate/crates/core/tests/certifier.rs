use std::f64::consts::LN_2;

use geolyap_core::certifier::*;
use geolyap_core::flow::{flow, lipschitz_estimate, Region, TimeVaryingField, Trajectory};
use geolyap_core::lyapunov::{choose_delta, construct_exp_v};
use geolyap_core::manifold::{distance, ManifoldKind, ManifoldPoint, TangentVector};
use geolyap_core::{systems, Error};

fn north() -> ManifoldPoint {
    ManifoldPoint::origin(ManifoldKind::Sphere(2))
}

fn grid() -> TrajectoryGrid {
    TrajectoryGrid::default()
}

#[test]
fn sphere_attractor_fits_unit_envelope() {
    let f = systems::geodesic_attractor(&north(), 1.0).unwrap();
    let trs = sample_trajectories(&f, &north(), &grid()).unwrap();
    let env = fit_exponential_envelope(&trs, &north()).unwrap();
    assert_eq!(env.class, StabilityClass::Les);
    assert!((env.k - 1.0).abs() < 0.02 && (env.lambda - 1.0).abs() < 0.02, "{env:?}");
    assert!(envelope_domination(&env, &trs, &north()).unwrap() <= 1.0 + 1e-9);
}

#[test]
fn euclidean_rate_two() {
    let o = ManifoldPoint::origin(ManifoldKind::Euclidean(2));
    let f = systems::geodesic_attractor(&o, 2.0).unwrap();
    let trs = sample_trajectories(&f, &o, &TrajectoryGrid { horizon: 5.0, ..grid() }).unwrap();
    let env = fit_exponential_envelope(&trs, &o).unwrap();
    assert!((env.lambda - 2.0).abs() < 0.04);
}

#[test]
fn stationary_data_is_not_exponential() {
    let z = systems::zero(ManifoldKind::Sphere(2));
    let x = ManifoldPoint::new(ManifoldKind::Sphere(2), vec![0.6, 0.0, 0.8]).unwrap();
    let off = flow(&z, 0.0, &x, 5.0, 0.1).unwrap();
    let at = flow(&z, 0.0, &north(), 5.0, 0.1).unwrap();
    let trs = vec![off, at.clone(), at];
    assert!(matches!(fit_exponential_envelope(&trs, &north()), Err(Error::Classification { .. })));
    assert!(fit_exponential_envelope(&trs[..2], &north()).is_err());
}

#[test]
fn classification_of_scenarios() {
    let f = systems::time_varying_attractor(&north(), 1.5, 0.5).unwrap();
    let trs = sample_trajectories(&f, &north(), &grid()).unwrap();
    let env = classify_stability(&trs, &north()).unwrap();
    assert_eq!(env.class, StabilityClass::Les);
    assert!(env.lambda >= 1.0);
    assert_eq!(classify_stability_global(&trs, &north()).unwrap().class, StabilityClass::UgesSampled);

    let o = ManifoldPoint::origin(ManifoldKind::Euclidean(2));
    let cubic = systems::cubic_slowdown(&o, 1.0).unwrap();
    let trs = sample_trajectories(&cubic, &o, &TrajectoryGrid { horizon: 20.0, ..grid() }).unwrap();
    match fit_exponential_envelope(&trs, &o) {
        Err(Error::Classification { candidate, .. }) => assert_eq!(candidate, StabilityClass::Uas),
        other => panic!("{other:?}"),
    }
    let env = classify_stability(&trs, &o).unwrap();
    assert_eq!(env.class, StabilityClass::Uas);
    // The envelope row at r_max decays like the closed form 1 / sqrt(2 s + r^-2).
    let r = env.beta.r_max();
    for (j, s) in env.beta.offsets.iter().enumerate().step_by(100) {
        let exact = 1.0 / (2.0 * s + r.powi(-2)).sqrt();
        assert!((env.beta.table.last().unwrap()[j] - exact).abs() < 1e-6);
    }

    let rot = systems::isometric_rotation(&north(), 1.0).unwrap();
    let trs = sample_trajectories(&rot, &north(), &grid()).unwrap();
    assert_eq!(classify_stability(&trs, &north()).unwrap().class, StabilityClass::Us);
}

#[test]
fn kl_envelope_is_monotone() {
    let f = systems::cubic_slowdown(&north(), 1.0).unwrap();
    let trs = sample_trajectories(&f, &north(), &grid()).unwrap();
    let env = classify_stability(&trs, &north()).unwrap();
    let b = &env.beta;
    for row in &b.table {
        assert!(row.windows(2).all(|w| w[1] <= w[0]));
    }
    for w in b.table.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, c)| a <= c));
    }
    for tr in &trs {
        let d0 = distance(tr.initial(), &north()).unwrap();
        for (t, x) in &tr.samples {
            assert!(distance(x, &north()).unwrap() <= b.eval(d0, t - tr.t0).unwrap() * (1.0 + 1e-12));
        }
    }
    assert_eq!(b.eval(0.0, 1.0), Some(0.0));
    assert_eq!(b.eval(b.r_max() * 1.1, 1.0), None);
    let (_, g) = b.strict_profile();
    assert!(g.windows(2).all(|w| w[1] < w[0]));
}

fn sphere_pipeline(grids: &CertifyGrids) -> (ConverseOutcome, Vec<Trajectory>) {
    let f = systems::geodesic_attractor(&north(), 1.0).unwrap();
    let trs = sample_trajectories(&f, &north(), &grid()).unwrap();
    let env = fit_exponential_envelope(&trs, &north()).unwrap();
    let lip = lipschitz_estimate(&f, &Region::new(north(), 1.0).unwrap(), &[0.0, 1.0], 500, 1).unwrap();
    (verify_converse_certificate(&f, &north(), &lip, &env, LN_2, 1.0, grids).unwrap(), trs)
}

#[test]
fn sphere_attractor_certifies() {
    let grids = CertifyGrids {
        n_points: 40,
        n_directions: 20,
        n_pairs: 20,
        n_pushforward: 20,
        ..CertifyGrids::default()
    };
    let (out, trs) = sphere_pipeline(&grids);
    assert!(out.report.pass, "{}", out.report.to_table());
    let c = &out.certificate.constants;
    for (got, want) in [(c.c1, 0.5), (c.c2, 0.5), (c.c3, 1.0), (c.c4, 1.0)] {
        assert!((got - want).abs() < 0.02 * want, "{got} vs {want}");
    }
    let mut anchors = out.report.anchors();
    let mut expected: Vec<&str> = anchors::CONVERSE_CHECKLIST.to_vec();
    expected.sort_unstable();
    anchors.sort_unstable();
    assert_eq!(anchors, expected);
    assert!(out.report.rows.windows(2).all(|w| w[0].name < w[1].name));
    // Classifier consistency on the same data.
    assert!(classify_stability(&trs, &north()).unwrap().class.is_exponential());
}

#[test]
fn invalid_delta_is_rejected_before_flows() {
    let f = TimeVaryingField::new(ManifoldKind::Sphere(2), "fails", |t, _| {
        Err(Error::FieldEvaluation { time: t, reason: "must not be called".into() })
    });
    let g = systems::geodesic_attractor(&north(), 1.0).unwrap();
    let trs = sample_trajectories(&g, &north(), &grid()).unwrap();
    let mut env = fit_exponential_envelope(&trs, &north()).unwrap();
    env.k = 2.0;
    let lip = lipschitz_estimate(&g, &Region::new(north(), 1.0).unwrap(), &[0.0], 50, 1).unwrap();
    let r = verify_converse_certificate(&f, &north(), &lip, &env, 0.1, 1.0, &CertifyGrids::default());
    assert!(matches!(r, Err(Error::InvalidDelta { .. })), "{r:?}");
}

#[test]
fn time_varying_gain_certifies_with_unit_rate() {
    let f = systems::time_varying_attractor(&north(), 1.5, 0.5).unwrap();
    let trs = sample_trajectories(&f, &north(), &grid()).unwrap();
    let mut env = fit_exponential_envelope(&trs, &north()).unwrap();
    // Uniform lower gain bound: d' <= -d.
    env.lambda = 1.0;
    env.k *= envelope_domination(&env, &trs, &north()).unwrap().max(1.0);
    let lip = lipschitz_estimate(&f, &Region::new(north(), 1.0).unwrap(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 600, 2).unwrap();
    let delta = choose_delta(env.k, env.lambda, 0.5).unwrap().delta;
    let grids = CertifyGrids { n_points: 30, n_directions: 15, n_pairs: 15, n_pushforward: 15, ..CertifyGrids::default() };
    let out = verify_converse_certificate(&f, &north(), &lip, &env, delta, 1.0, &grids).unwrap();
    assert!(out.report.pass, "{}", out.report.to_table());
}

#[test]
fn direct_check_examples() {
    let o = ManifoldPoint::origin(ManifoldKind::Euclidean(2));
    let f = systems::geodesic_attractor(&o, 1.0).unwrap();
    let grid: Vec<(f64, ManifoldPoint)> = (0..20)
        .map(|i| {
            let a = i as f64 * 0.3;
            (0.5 * i as f64, ManifoldPoint::new(ManifoldKind::Euclidean(2), vec![a.cos(), 0.5 * a.sin()]).unwrap())
        })
        .collect();
    let sq = |_: f64, x: &ManifoldPoint| Ok(x.coords().iter().map(|c| c * c).sum::<f64>());
    let w1 = ComparisonFunction::Power { c: 1.0, p: 2.0 };
    let w3 = ComparisonFunction::Power { c: 2.0, p: 2.0 };
    let out = direct_lyapunov_check(sq, &f, &o, [&w1, &w1, &w3], &grid).unwrap();
    assert!(out.report.pass, "{}", out.report.to_table());
    assert_eq!(out.exponential_rate, Some(2.0));

    // Exponential-mode V with its own constants, and with an inflated W1.
    let vf = construct_exp_v(&f, &o, 1.0, 1.0).unwrap();
    let b = geolyap_core::lyapunov::theoretical_bounds(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let v = |t: f64, x: &ManifoldPoint| vf.evaluate_v(t, x);
    let [c1, c2] = [b.c1, b.c2].map(|c| ComparisonFunction::Power { c, p: 1.0 });
    let w3 = ComparisonFunction::Power { c: b.c3 * b.c1, p: 1.0 };
    assert!(direct_lyapunov_check(v, &f, &o, [&c1, &c2, &w3], &grid).unwrap().report.pass);
    let big = ComparisonFunction::Power { c: b.c2 * 1.5, p: 1.0 };
    let bad = direct_lyapunov_check(v, &f, &o, [&big, &c2, &w3], &grid).unwrap();
    assert!(!bad.report.pass);
    assert_eq!(bad.report.failing().map(|r| r.name.as_str()).collect::<Vec<_>>(), vec!["direct-lower"]);
}

fn unit_channel(scale: f64) -> TimeVaryingField {
    // f(t, x, u) = -x + scale * u e_0 on R^2, scalar input.
    let kind = ManifoldKind::Euclidean(2);
    TimeVaryingField::new(kind, "channel", |_, x| TangentVector::new(x, x.coords().iter().map(|c| -c).collect()))
        .with_input(1, move |_, x, u| {
            let c = x.coords();
            TangentVector::new(x, vec![-c[0] + scale * u[0], -c[1]])
        })
}

#[test]
fn input_lipschitz_examples() {
    let region = Region::new(ManifoldPoint::origin(ManifoldKind::Euclidean(2)), 1.0).unwrap();
    let l = input_lipschitz_estimate(&unit_channel(1.0), &region, &[0.0], 100, 1.0, 3).unwrap();
    assert!((l - 1.0).abs() < 1e-12);
    let l = input_lipschitz_estimate(&unit_channel(2.0), &region, &[0.0], 100, 1.0, 3).unwrap();
    assert!((l - 2.0).abs() < 0.02);
    assert!(input_lipschitz_estimate(&unit_channel(1.0), &region, &[0.0], 100, 0.0, 3).is_err());
    let plain = TimeVaryingField::new(ManifoldKind::Euclidean(2), "plain", |_, x| Ok(TangentVector::zero(x)));
    assert!(input_lipschitz_estimate(&plain, &region, &[0.0], 10, 1.0, 3).is_err());
}

#[test]
fn disturbance_contract() {
    let s = DisturbanceSignal::new(
        SignalShape::Step { before: vec![0.05, 0.0, 0.0], after: vec![0.3, 0.0, 0.0], at: 2.0 },
        0.1,
    )
    .unwrap();
    assert!(s.checked(1.0).is_ok());
    assert!(matches!(s.checked(2.5), Err(Error::InputContract { .. })));
    let f = systems::geodesic_attractor(&north(), 1.0).unwrap().forced(s.signal_fn()).unwrap();
    let x = ManifoldPoint::new(ManifoldKind::Sphere(2), vec![0.6, 0.0, 0.8]).unwrap();
    assert!(matches!(flow(&f, 0.0, &x, 5.0, 0.01), Err(Error::InputContract { .. })));
    let sine = DisturbanceSignal::new(SignalShape::Sine { amplitude: vec![0.0, 0.1, 0.0], omega: 2.0, phase: 0.0 }, 0.1).unwrap();
    assert!((0..100).all(|k| sine.checked(0.1 * k as f64).is_ok()));
    assert_eq!(sine.scaled(2.0).bound, 0.2);
}

#[test]
fn predicted_bound_monotonicity() {
    let mut prev = 0.0;
    for u in [0.0, 0.05, 0.1, 0.2, 0.4] {
        for l in [0.5, 1.0, 2.0] {
            let b = predicted_ultimate_bound(1.0, 1.0, l, u);
            assert!(b >= predicted_ultimate_bound(1.0, 1.0, l * 0.5, u));
            assert!(b >= predicted_ultimate_bound(2.0, 1.0, l, u));
        }
        let b = predicted_ultimate_bound(1.0, 1.0, 1.0, u);
        assert!(b >= prev);
        prev = b;
    }
}

#[test]
fn iss_sphere_attractor() {
    let f = systems::geodesic_attractor(&north(), 1.0).unwrap();
    let grids = CertifyGrids { n_points: 10, n_directions: 5, n_pairs: 5, n_pushforward: 5, ..CertifyGrids::default() };
    let (out, _) = sphere_pipeline(&grids);
    let opts = IssOptions { n_points: 20, ..IssOptions::default() };
    let mut limsups = Vec::new();
    for bound in [0.0, 0.05, 0.1, 0.2] {
        let s = DisturbanceSignal::constant(vec![bound, 0.0, 0.0]);
        let r = iss_certify(&f, &north(), &out.certificate, &out.v, &s, &opts).unwrap();
        assert!(r.report.pass, "{bound}: {}", r.report.report.to_table());
        assert!(r.report.measured_v_limsup <= r.report.predicted_v_bound * 1.05 + 1e-6);
        limsups.push(r.report.measured_v_limsup);
    }
    // Linear scaling of the ultimate bound in |u|.
    assert!(limsups[3] <= 2.0 * limsups[2] * 1.05 && limsups[2] <= 2.0 * limsups[1] * 1.05);
}

#[test]
fn cubic_slowdown_ugas_certificate() {
    let o = ManifoldPoint::origin(ManifoldKind::Euclidean(2));
    let f = systems::cubic_slowdown(&o, 1.0).unwrap();
    let trs = sample_trajectories(&f, &o, &TrajectoryGrid { horizon: 20.0, ..grid() }).unwrap();
    let env = classify_stability(&trs, &o).unwrap();
    let lip = lipschitz_estimate(&f, &Region::new(o.clone(), 1.0).unwrap(), &[0.0], 300, 4).unwrap();
    let grids = CertifyGrids { n_ugas: 20, n_directions: 10, ..CertifyGrids::default() };
    let out = verify_ugas_certificate(&f, &o, lip.value(), &env, 20.0, &grids).unwrap();
    assert!(out.report.pass, "{}", out.report.to_table());
    let mut anchors = out.report.anchors();
    anchors.sort_unstable();
    let mut expected = anchors::UGAS_CHECKLIST.to_vec();
    expected.sort_unstable();
    assert_eq!(anchors, expected);
}
