//! Seeded random points and tangent vectors for property checks.

use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{exp_map, so3, ManifoldKind, ManifoldPoint, TangentVector};

pub type SampleRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Unit tangent vector with a uniformly distributed direction.
pub fn random_unit_tangent<R: Rng + ?Sized>(x: &ManifoldPoint, rng: &mut R) -> TangentVector {
    let kind = x.kind();
    loop {
        let v = kind.project_tangent(x.raw(), &gaussian(kind.ambient_dim(), rng));
        let t = TangentVector::from_raw(x, v);
        let n = t.norm();
        if n > 1e-8 {
            return t.scale(1.0 / n);
        }
    }
}

/// Tangent vector with uniform direction and norm uniform in `[0, max_norm)`.
pub fn random_tangent<R: Rng + ?Sized>(
    x: &ManifoldPoint,
    max_norm: f64,
    rng: &mut R,
) -> TangentVector {
    let r = rng.random::<f64>() * max_norm;
    random_unit_tangent(x, rng).scale(r)
}

/// Point at geodesic distance in `[r_min, r_max)` from `center`.
pub fn random_point_in_shell<R: Rng + ?Sized>(
    center: &ManifoldPoint,
    r_min: f64,
    r_max: f64,
    rng: &mut R,
) -> ManifoldPoint {
    let r = r_min + rng.random::<f64>() * (r_max - r_min);
    let v = random_unit_tangent(center, rng).scale(r);
    exp_map(center, &v).expect("tangent is based at center")
}

pub fn random_point_in_ball<R: Rng + ?Sized>(
    center: &ManifoldPoint,
    radius: f64,
    rng: &mut R,
) -> ManifoldPoint {
    random_point_in_shell(center, 0.0, radius, rng)
}

/// A spread-out random point: Gaussian in flat space, uniform on spheres,
/// rotations with angle below `pi - 0.05`, hyperbolic points within distance 2
/// of the origin.
pub fn random_point<R: Rng + ?Sized>(kind: ManifoldKind, rng: &mut R) -> ManifoldPoint {
    match kind {
        ManifoldKind::Euclidean(n) => ManifoldPoint::from_raw(kind, gaussian(n, rng)),
        ManifoldKind::Sphere(n) => loop {
            let g = gaussian(n + 1, rng);
            if g.norm() > 1e-6 {
                return ManifoldPoint::from_raw(kind, kind.project_point(&g));
            }
        },
        ManifoldKind::So3 => {
            let g = gaussian(3, rng);
            let axis = Vector3::new(g[0], g[1], g[2]).normalize();
            let angle = rng.random::<f64>() * (std::f64::consts::PI - 0.05);
            let r = so3::exp_so3(&(axis * angle));
            ManifoldPoint::from_raw(kind, kind.project_point(&so3::from_mat(&r)))
        }
        ManifoldKind::Hyperbolic2 => {
            let o = ManifoldPoint::origin(kind);
            random_point_in_ball(&o, 2.0, rng)
        }
    }
}
