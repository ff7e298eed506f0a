//! Built-in vector fields used by the shipped scenarios and the test suites.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::flow::TimeVaryingField;
use crate::manifold::{distance, log_map, so3, ManifoldKind, ManifoldPoint, TangentVector};

/// Dimension of the input channel of `kind`: ambient vectors, or body angular
/// velocities on SO(3).
pub fn input_dim(kind: ManifoldKind) -> usize {
    match kind {
        ManifoldKind::So3 => 3,
        k => k.ambient_dim(),
    }
}

/// Maps an input vector to a tangent vector at `x`: orthogonal projection of an
/// ambient vector, or `x hat(u)` on SO(3).
pub fn input_tangent(x: &ManifoldPoint, u: &[f64]) -> Result<TangentVector> {
    let kind = x.kind();
    if u.len() != input_dim(kind) {
        return Err(Error::InvalidArgument(format!(
            "input of dimension {} for {kind}, expected {}",
            u.len(),
            input_dim(kind)
        )));
    }
    match kind {
        ManifoldKind::So3 => {
            let r = x.rotation().expect("SO(3) point");
            let m = r * so3::hat(&Vector3::new(u[0], u[1], u[2]));
            TangentVector::from_ambient(x, m.transpose().as_slice().to_vec())
        }
        _ => TangentVector::from_ambient(x, u.to_vec()),
    }
}

fn attach_input(field: TimeVaryingField, drift: impl Fn(f64, &ManifoldPoint) -> Result<TangentVector> + Send + Sync + 'static) -> TimeVaryingField {
    let dim = input_dim(field.kind());
    field.with_input(dim, move |t, x, u| drift(t, x)?.add(&input_tangent(x, u)?))
}

/// `f(t, x) = gain(t) log_x(x*)`, so `d(x, x*)` decays at rate `gain(t)`.
fn scaled_attractor(
    x_star: &ManifoldPoint,
    name: &str,
    gain: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
) -> Result<TimeVaryingField> {
    let target = x_star.clone();
    let drift = move |t: f64, x: &ManifoldPoint| -> Result<TangentVector> {
        let v = log_map(x, &target).map_err(|e| Error::FieldEvaluation {
            time: t,
            reason: e.to_string(),
        })?;
        Ok(v.scale(gain(t)))
    };
    let d2 = drift.clone();
    let field = TimeVaryingField::new(x_star.kind(), name, drift);
    attach_input(field, d2).with_equilibrium(x_star.clone())
}

/// Geodesic attractor `f(x) = rate * log_x(x*)`.
pub fn geodesic_attractor(x_star: &ManifoldPoint, rate: f64) -> Result<TimeVaryingField> {
    positive("rate", rate)?;
    scaled_attractor(x_star, "geodesic_attractor", move |_| rate)
}

/// Attractor with periodic gain `mean + amplitude * sin t`.
pub fn time_varying_attractor(x_star: &ManifoldPoint, mean: f64, amplitude: f64) -> Result<TimeVaryingField> {
    if !(mean > amplitude.abs()) {
        return Err(Error::InvalidArgument(format!(
            "gain {mean} + {amplitude} sin t must stay positive"
        )));
    }
    scaled_attractor(x_star, "time_varying_attractor", move |t| mean + amplitude * t.sin())
}

/// `f(x) = rate * d(x, x*)^2 log_x(x*)`: the distance obeys `d' = -rate d^3`,
/// asymptotically but not exponentially stable.
pub fn cubic_slowdown(x_star: &ManifoldPoint, rate: f64) -> Result<TimeVaryingField> {
    positive("rate", rate)?;
    let target = x_star.clone();
    let drift = move |t: f64, x: &ManifoldPoint| -> Result<TangentVector> {
        let v = log_map(x, &target).map_err(|e| Error::FieldEvaluation {
            time: t,
            reason: e.to_string(),
        })?;
        let d = v.norm();
        Ok(v.scale(rate * d * d))
    };
    let field = TimeVaryingField::new(x_star.kind(), "cubic_slowdown", drift.clone());
    attach_input(field, drift).with_equilibrium(x_star.clone())
}

type AmbientDrift = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

/// Killing field of a one-parameter rotation group fixing `x*`; distances to `x*`
/// are conserved, so the equilibrium is stable but not attractive.
pub fn isometric_rotation(x_star: &ManifoldPoint, rate: f64) -> Result<TimeVaryingField> {
    let kind = x_star.kind();
    let c = DVector::from_column_slice(x_star.coords());
    let drift: Box<AmbientDrift> = match kind {
        ManifoldKind::Euclidean(n) => {
            if n < 2 {
                return Err(Error::InvalidArgument("rotation needs dimension at least 2".into()));
            }
            let a = plane_generator(n, &unit(n, 0), &unit(n, 1)) * rate;
            Box::new(move |x| &a * (x - &c))
        }
        ManifoldKind::Sphere(n) => {
            if n < 2 {
                return Err(Error::InvalidArgument("rotation on a circle fixes no point".into()));
            }
            let (e1, e2) = orthogonal_pair(&c);
            let a = plane_generator(n + 1, &e1, &e2) * rate;
            Box::new(move |x| &a * x)
        }
        ManifoldKind::So3 => {
            let omega = so3::hat(&Vector3::new(0.0, 0.0, rate));
            let r_star = x_star.rotation().expect("SO(3) point");
            let conj = r_star.transpose() * omega * r_star;
            Box::new(move |x| {
                let r = Matrix3::from_row_slice(x.as_slice());
                let m = omega * r - r * conj;
                DVector::from_row_slice(m.transpose().as_slice())
            })
        }
        ManifoldKind::Hyperbolic2 => {
            let j0 = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -rate, 0.0, rate, 0.0]);
            let (b, b_inv) = boost_to(&c);
            let j = &b * j0 * b_inv;
            Box::new(move |x| &j * x)
        }
    };
    let field = TimeVaryingField::new(kind, "isometric_rotation", move |_, x| {
        TangentVector::from_ambient(x, drift(&DVector::from_column_slice(x.coords())).as_slice().to_vec())
    });
    let f2 = field.clone();
    attach_input(field, move |t, x| f2.eval(t, x)).with_equilibrium(x_star.clone())
}

/// The zero field; every point is an equilibrium.
pub fn zero(kind: ManifoldKind) -> TimeVaryingField {
    let field = TimeVaryingField::new(kind, "zero", |_, x| Ok(TangentVector::zero(x)));
    attach_input(field, |_, x| Ok(TangentVector::zero(x)))
}

/// Distance to `x*`, the comparison quantity of every scenario.
pub fn distance_to(x_star: &ManifoldPoint) -> impl Fn(&ManifoldPoint) -> Result<f64> + '_ {
    move |x| distance(x, x_star)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

/// `e2 e1^T - e1 e2^T`: rotates `e1` towards `e2`.
fn plane_generator(n: usize, e1: &DVector<f64>, e2: &DVector<f64>) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    a += e2 * e1.transpose();
    a -= e1 * e2.transpose();
    a
}

/// Two orthonormal vectors orthogonal to the unit vector `c`.
fn orthogonal_pair(c: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let n = c.len();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut v = unit(n, i);
        v -= c * c.dot(&v);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let norm = v.norm();
        if norm > 0.5 {
            basis.push(v / norm);
            if basis.len() == 2 {
                break;
            }
        }
    }
    (basis[0].clone(), basis[1].clone())
}

/// Lorentz boost taking the hyperboloid origin to `c`, and its inverse.
fn boost_to(c: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let ch = c[0];
    let sv = Vector3::new(0.0, c[1], c[2]);
    let sh = sv.norm();
    if sh < 1e-15 {
        return (DMatrix::identity(3, 3), DMatrix::identity(3, 3));
    }
    let n = [c[1] / sh, c[2] / sh];
    let build = |sign: f64| {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                ch,
                sign * sh * n[0],
                sign * sh * n[1],
                sign * sh * n[0],
                1.0 + (ch - 1.0) * n[0] * n[0],
                (ch - 1.0) * n[0] * n[1],
                sign * sh * n[1],
                (ch - 1.0) * n[0] * n[1],
                1.0 + (ch - 1.0) * n[1] * n[1],
            ],
        )
    };
    (build(1.0), build(-1.0))
}
