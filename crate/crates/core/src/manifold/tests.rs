use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};

use super::sampling::{random_point, random_tangent, seeded_rng};
use super::*;

fn pt(kind: ManifoldKind, c: &[f64]) -> ManifoldPoint {
    ManifoldPoint::new(kind, c.to_vec()).unwrap()
}

fn tv(base: &ManifoldPoint, c: &[f64]) -> TangentVector {
    TangentVector::new(base, c.to_vec()).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

const ALL: [ManifoldKind; 5] = [
    ManifoldKind::Euclidean(2),
    ManifoldKind::Euclidean(3),
    ManifoldKind::Sphere(2),
    ManifoldKind::So3,
    ManifoldKind::Hyperbolic2,
];

#[test]
fn inner_examples() {
    let e = ManifoldKind::Euclidean(2);
    let o = pt(e, &[0.0, 0.0]);
    assert_eq!(inner(&o, &tv(&o, &[1.0, 0.0]), &tv(&o, &[0.0, 1.0])).unwrap(), 0.0);

    let s = ManifoldKind::Sphere(2);
    let n = pt(s, &[0.0, 0.0, 1.0]);
    let u = tv(&n, &[1.0, 0.0, 0.0]);
    assert_eq!(inner(&n, &u, &u).unwrap(), 1.0);

    let h = ManifoldKind::Hyperbolic2;
    let o = pt(h, &[1.0, 0.0, 0.0]);
    let u = tv(&o, &[0.0, 1.0, 0.0]);
    assert_eq!(inner(&o, &u, &u).unwrap(), 1.0);
}

#[test]
fn inner_rejects_mismatched_bases() {
    let s = ManifoldKind::Sphere(2);
    let n = pt(s, &[0.0, 0.0, 1.0]);
    let e = pt(s, &[1.0, 0.0, 0.0]);
    let u = tv(&n, &[1.0, 0.0, 0.0]);
    let w = tv(&e, &[0.0, 1.0, 0.0]);
    assert_eq!(inner(&n, &u, &w), Err(Error::BaseMismatch));
    let o = ManifoldPoint::origin(ManifoldKind::Euclidean(3));
    assert!(matches!(distance(&n, &o), Err(Error::KindMismatch { .. })));
}

#[test]
fn constructors_validate_constraints() {
    assert!(ManifoldPoint::new(ManifoldKind::Sphere(2), vec![0.0, 0.0, 1.1]).is_err());
    assert!(ManifoldPoint::new(ManifoldKind::Sphere(2), vec![0.0, 1.0]).is_err());
    assert!(ManifoldPoint::new(ManifoldKind::Hyperbolic2, vec![-1.0, 0.0, 0.0]).is_err());
    let n = pt(ManifoldKind::Sphere(2), &[0.0, 0.0, 1.0]);
    assert!(TangentVector::new(&n, vec![0.0, 0.0, 1.0]).is_err());
    assert!("sphere0".parse::<ManifoldKind>().is_err());
    assert_eq!("SO3".parse::<ManifoldKind>().unwrap(), ManifoldKind::So3);
    assert_eq!("euclidean4".parse::<ManifoldKind>().unwrap(), ManifoldKind::Euclidean(4));
}

#[test]
fn exp_examples() {
    let e = ManifoldKind::Euclidean(2);
    let x = pt(e, &[1.0, 2.0]);
    let y = exp_map(&x, &tv(&x, &[3.0, 4.0])).unwrap();
    assert_eq!(y.coords(), &[4.0, 6.0]);

    let s = ManifoldKind::Sphere(2);
    let n = pt(s, &[0.0, 0.0, 1.0]);
    let y = exp_map(&n, &tv(&n, &[FRAC_PI_2, 0.0, 0.0])).unwrap();
    assert!(close(y.coords(), &[1.0, 0.0, 0.0], 1e-15));

    // Rotation about z by theta, compared with the explicit matrix.
    let theta = 0.7;
    let id = ManifoldPoint::origin(ManifoldKind::So3);
    let v = TangentVector::new(&id, so3::from_mat(&so3::hat(&Vector3::new(0.0, 0.0, theta))).as_slice().to_vec()).unwrap();
    let r = exp_map(&id, &v).unwrap().rotation().unwrap();
    let expected = Matrix3::new(
        theta.cos(), -theta.sin(), 0.0,
        theta.sin(), theta.cos(), 0.0,
        0.0, 0.0, 1.0,
    );
    assert!((r - expected).amax() < 1e-15);
}

#[test]
fn log_and_distance_examples() {
    let e = ManifoldKind::Euclidean(2);
    let o = pt(e, &[0.0, 0.0]);
    let y = pt(e, &[3.0, 4.0]);
    assert_eq!(log_map(&o, &y).unwrap().components(), &[3.0, 4.0]);
    assert_eq!(distance(&o, &y).unwrap(), 5.0);

    let s = ManifoldKind::Sphere(2);
    let n = pt(s, &[0.0, 0.0, 1.0]);
    let q = pt(s, &[1.0, 0.0, 0.0]);
    assert!(close(log_map(&n, &q).unwrap().components(), &[FRAC_PI_2, 0.0, 0.0], 1e-15));
    assert!((distance(&n, &q).unwrap() - FRAC_PI_2).abs() < 1e-15);

    let h = ManifoldKind::Hyperbolic2;
    let o = pt(h, &[1.0, 0.0, 0.0]);
    let p = pt(h, &[1f64.cosh(), 1f64.sinh(), 0.0]);
    assert!((distance(&o, &p).unwrap() - 1.0).abs() < 1e-14);

    for kind in ALL {
        let x = random_point(kind, &mut seeded_rng(3));
        let v = log_map(&x, &x).unwrap();
        assert!(v.components().iter().all(|c| c.abs() < 1e-15), "{kind}");
        assert_eq!(distance(&x, &x).unwrap(), 0.0);
    }
}

#[test]
fn cut_locus_is_rejected() {
    let s = ManifoldKind::Sphere(2);
    let n = pt(s, &[0.0, 0.0, 1.0]);
    let south = pt(s, &[0.0, 0.0, -1.0]);
    assert!(matches!(log_map(&n, &south), Err(Error::CutLocus { .. })));
    let v = tv(&n, &[1.0, 0.0, 0.0]);
    assert!(matches!(parallel_transport(&n, &south, &v), Err(Error::CutLocus { .. })));

    let id = ManifoldPoint::origin(ManifoldKind::So3);
    let flip = ManifoldPoint::from_rotation(&Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0)).unwrap();
    assert!(matches!(log_map(&id, &flip), Err(Error::CutLocus { .. })));
    assert!((distance(&id, &flip).unwrap() - PI).abs() < 1e-12);
}

#[test]
fn so3_log_is_accurate_near_pi() {
    let id = ManifoldPoint::origin(ManifoldKind::So3);
    for angle in [2.5, 3.0, PI - 1e-4] {
        let axis = Vector3::new(1.0, -2.0, 0.5).normalize();
        let r = ManifoldPoint::from_rotation(&so3::exp_so3(&(axis * angle))).unwrap();
        let v = log_map(&id, &r).unwrap();
        let back = exp_map(&id, &v).unwrap();
        assert!(distance(&back, &r).unwrap() < 1e-9, "angle {angle}");
        assert!((v.norm() - angle).abs() < 1e-9);
    }
}

#[test]
fn transport_examples() {
    let s = ManifoldKind::Sphere(2);
    let n = pt(s, &[0.0, 0.0, 1.0]);
    let q = pt(s, &[1.0, 0.0, 0.0]);
    let v = tv(&n, &[0.0, 1.0, 0.0]);
    let pv = parallel_transport(&n, &q, &v).unwrap();
    assert!(close(pv.components(), &[0.0, 1.0, 0.0], 1e-15));
    // The geodesic velocity is carried to the geodesic velocity.
    let u = tv(&n, &[1.0, 0.0, 0.0]);
    let pu = parallel_transport(&n, &q, &u).unwrap();
    assert!(close(pu.components(), &[0.0, 0.0, -1.0], 1e-15));

    for kind in ALL {
        let mut rng = seeded_rng(11);
        let x = random_point(kind, &mut rng);
        let v = random_tangent(&x, 1.0, &mut rng);
        let same = parallel_transport(&x, &x, &v).unwrap();
        assert!(close(same.components(), v.components(), 1e-14), "{kind}");
    }

    let e = ManifoldKind::Euclidean(3);
    let a = pt(e, &[1.0, 2.0, 3.0]);
    let b = pt(e, &[-1.0, 0.5, 2.0]);
    let v = tv(&a, &[0.3, -0.2, 0.9]);
    assert_eq!(parallel_transport(&a, &b, &v).unwrap().components(), v.components());
}

/// Transport by many small steps that re-project onto each tangent space along
/// the geodesic. For embedded manifolds with the induced metric this converges
/// to the Levi-Civita transport, independently of the closed forms.
fn projection_ladder(x: &ManifoldPoint, y: &ManifoldPoint, v: &TangentVector, steps: usize) -> Vec<f64> {
    let kind = x.kind();
    let mut w = v.raw().clone();
    for k in 1..=steps {
        let p = geodesic_point(x, y, k as f64 / steps as f64).unwrap();
        w = kind.project_tangent(p.raw(), &w);
    }
    w.as_slice().to_vec()
}

#[test]
fn transport_matches_projection_ladder() {
    for kind in [ManifoldKind::Sphere(2), ManifoldKind::Sphere(4), ManifoldKind::So3, ManifoldKind::Hyperbolic2] {
        let mut rng = seeded_rng(5);
        for _ in 0..5 {
            let x = random_point(kind, &mut rng);
            let y = super::sampling::random_point_in_ball(&x, 1.5, &mut rng);
            let v = random_tangent(&x, 1.0, &mut rng);
            let exact = parallel_transport(&x, &y, &v).unwrap();
            let ladder = projection_ladder(&x, &y, &v, 20000);
            let err = exact
                .components()
                .iter()
                .zip(&ladder)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-3, "{kind}: {err}");
        }
    }
}

#[test]
fn log_differential_matches_finite_differences() {
    for kind in ALL {
        let mut rng = seeded_rng(17);
        for _ in 0..10 {
            let x = random_point(kind, &mut rng);
            let y = super::sampling::random_point_in_ball(&x, 2.0, &mut rng);
            let w = random_tangent(&y, 1.0, &mut rng);
            let exact = log_differential(&x, &y, &w).unwrap();
            let h = 1e-5;
            let plus = log_map(&x, &exp_map(&y, &w.scale(h)).unwrap()).unwrap();
            let minus = log_map(&x, &exp_map(&y, &w.scale(-h)).unwrap()).unwrap();
            let fd = plus.sub(&minus).unwrap().scale(0.5 / h);
            let err = exact.sub(&fd).unwrap().norm();
            assert!(err < 1e-7, "{kind}: {err}");
        }
    }
}

#[test]
fn geodesic_point_examples() {
    let e = ManifoldKind::Euclidean(2);
    let x = pt(e, &[0.0, 0.0]);
    let y = pt(e, &[2.0, 0.0]);
    assert_eq!(geodesic_point(&x, &y, 0.0).unwrap(), x);
    assert_eq!(geodesic_point(&x, &y, 1.0).unwrap(), y);
    assert_eq!(geodesic_point(&x, &y, 0.5).unwrap().coords(), &[1.0, 0.0]);
    assert!(geodesic_point(&x, &y, 1.5).is_err());

    for kind in ALL {
        let mut rng = seeded_rng(23);
        let x = random_point(kind, &mut rng);
        let y = super::sampling::random_point_in_ball(&x, 2.0, &mut rng);
        let d = distance(&x, &y).unwrap();
        let m = geodesic_point(&x, &y, 0.3).unwrap();
        assert!((distance(&x, &m).unwrap() - 0.3 * d).abs() < 1e-12, "{kind}");
    }
}

#[test]
fn distance_matches_arc_length_of_samples() {
    for kind in ALL {
        let mut rng = seeded_rng(29);
        let x = random_point(kind, &mut rng);
        let y = super::sampling::random_point_in_ball(&x, 2.5, &mut rng);
        let n = 1000;
        let mut prev = x.clone();
        let mut len = 0.0;
        for k in 1..=n {
            let p = geodesic_point(&x, &y, k as f64 / n as f64).unwrap();
            len += distance(&prev, &p).unwrap();
            prev = p;
        }
        assert!((len - distance(&x, &y).unwrap()).abs() < 1e-6, "{kind}");
    }
}

#[test]
fn geodesic_segments_have_no_covariant_acceleration() {
    for kind in [ManifoldKind::Sphere(2), ManifoldKind::So3, ManifoldKind::Hyperbolic2, ManifoldKind::Euclidean(2)] {
        let mut rng = seeded_rng(31);
        let x = random_point(kind, &mut rng);
        let v = random_tangent(&x, 1.5, &mut rng);
        let seg = GeodesicSegment::new(&x, &v).unwrap();
        assert!((seg.length() - v.norm()).abs() < 1e-15);
        let r = seg.acceleration_residual(10).unwrap();
        assert!(r < 1e-6, "{kind}: {r}");
        let end_velocity = seg.velocity(1.0).unwrap();
        assert!((end_velocity.norm() - v.norm()).abs() < 1e-12);
    }
}

#[test]
fn first_variation_examples() {
    let e = ManifoldKind::Euclidean(2);
    let x = pt(e, &[0.0, 0.0]);
    let y = pt(e, &[1.0, 0.0]);
    let var = EndpointVariation::new(&x, &y, &TangentVector::zero(&x), &tv(&y, &[1.0, 0.0])).unwrap();
    let (d, b) = first_variation_terms(&x, &y, &var, 1e-3).unwrap();
    assert!((d - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-15);

    // Fixed endpoints: boundary term and length derivative both vanish.
    let s = ManifoldKind::Sphere(2);
    let n = pt(s, &[0.0, 0.0, 1.0]);
    let q = exp_map(&n, &tv(&n, &[1.0, 0.0, 0.0])).unwrap();
    let bump = BumpVariation { x: n.clone(), y: q.clone(), direction: tv(&n, &[0.0, 0.3, 0.0]) };
    let (d, b) = first_variation_terms(&n, &q, &bump, 1e-3).unwrap();
    assert_eq!(b, 0.0);
    assert!(d.abs() < 1e-6, "{d}");

    // Endpoint moved orthogonally to a meridian from the pole.
    let var = EndpointVariation::new(&n, &q, &TangentVector::zero(&n), &tv(&q, &[0.0, 1.0, 0.0])).unwrap();
    let (d, b) = first_variation_terms(&n, &q, &var, 1e-4).unwrap();
    assert!(b.abs() < 1e-15);
    assert!(d.abs() < 1e-8, "{d}");

    assert!(matches!(
        first_variation_residual(&n, &n, &var, 1e-3),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn serde_round_trip_points() {
    let x = random_point(ManifoldKind::So3, &mut seeded_rng(1));
    let s = serde_json::to_string(&x).unwrap();
    assert!(s.starts_with("{\"kind\":\"so3\",\"coords\":["));
    let back: ManifoldPoint = serde_json::from_str(&s).unwrap();
    assert!(distance(&x, &back).unwrap() < 1e-14);
    let v = random_tangent(&x, 1.0, &mut seeded_rng(2));
    let s = serde_json::to_string(&v).unwrap();
    let back: TangentVector = serde_json::from_str(&s).unwrap();
    assert!(back.sub(&TangentVector::from_ambient(back.base(), v.components().to_vec()).unwrap()).unwrap().norm() < 1e-14);
    assert!(serde_json::from_str::<ManifoldPoint>(r#"{"kind":"sphere2","coords":[1,1,1]}"#).is_err());
}
