//! Rotation group SO(3) with the bi-invariant metric `<U, V> = 1/2 tr(U^T V)`,
//! normalized so that the geodesic distance between two rotations equals the
//! angle of their relative rotation.
//!
//! Points are stored row-major as 9 coordinates; a tangent vector at `R` is
//! `R * hat(w)` in the same layout.

use nalgebra::{DVector, Matrix3, Vector3};

pub(crate) fn to_mat(c: &DVector<f64>) -> Matrix3<f64> {
    Matrix3::from_row_slice(c.as_slice())
}

pub(crate) fn from_mat(m: &Matrix3<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(9);
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[(i, j)];
        }
    }
    out
}

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0)
}

pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

fn skew_part(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m - m.transpose()) * 0.5
}

/// Rodrigues formula for the exponential of `hat(w)`.
pub fn exp_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-4 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(w);
    Matrix3::identity() + k * a + k * k * b
}

/// Rotation angle of `m`, in `[0, pi]`.
pub fn rotation_angle(m: &Matrix3<f64>) -> f64 {
    let c = 0.5 * (m.trace() - 1.0);
    let s = vee(&skew_part(m)).norm();
    s.atan2(c)
}

/// Principal logarithm `w` with `exp_so3(w) = m`; `None` when the angle is within
/// `margin` of pi.
pub fn log_so3(m: &Matrix3<f64>, margin: f64) -> Option<Vector3<f64>> {
    let c = 0.5 * (m.trace() - 1.0);
    let a = vee(&skew_part(m));
    let s = a.norm();
    let theta = s.atan2(c);
    if theta > std::f64::consts::PI - margin {
        return None;
    }
    if theta < 1e-4 {
        let t2 = theta * theta;
        return Some(a * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0));
    }
    if theta < 2.0 {
        return Some(a * (theta / s));
    }
    // Near pi the symmetric part (1 - cos) n n^T determines the axis accurately.
    let b = (m + m.transpose()) * 0.5 - Matrix3::identity() * c;
    let mut best = 0;
    for i in 1..3 {
        if b[(i, i)] > b[(best, best)] {
            best = i;
        }
    }
    let mut n: Vector3<f64> = b.column(best).into();
    n /= n.norm();
    if n.dot(&a) < 0.0 {
        n = -n;
    }
    Some(n * theta)
}

/// Inverse of the right Jacobian of the exponential.
pub fn right_jacobian_inv(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let coef = if theta < 1e-4 {
        1.0 / 12.0 + theta2 / 720.0
    } else {
        1.0 / theta2 - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    let k = hat(w);
    Matrix3::identity() + k * 0.5 + k * k * coef
}

/// Nearest rotation in the Frobenius sense.
pub(crate) fn orthonormalize(m: &Matrix3<f64>) -> Matrix3<f64> {
    let defect = (m.transpose() * m - Matrix3::identity()).norm();
    let mut r = if defect < 0.1 && m.determinant() > 0.0 {
        *m
    } else {
        let svd = m.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut d = Matrix3::identity();
        if (u * vt).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        u * d * vt
    };
    // Newton-Schulz polar iteration: R <- R (3I - R^T R) / 2.
    for _ in 0..8 {
        let e = r.transpose() * r - Matrix3::identity();
        if e.amax() < 1e-16 {
            break;
        }
        r = r * (Matrix3::identity() * 1.5 - r.transpose() * r * 0.5);
    }
    r
}

pub(crate) fn project_point(c: &DVector<f64>) -> DVector<f64> {
    from_mat(&orthonormalize(&to_mat(c)))
}

pub(crate) fn project_tangent(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let r = to_mat(x);
    from_mat(&(r * skew_part(&(r.transpose() * to_mat(v)))))
}

pub(crate) fn constraint_residual(c: &DVector<f64>) -> f64 {
    let r = to_mat(c);
    let orth = (r.transpose() * r - Matrix3::identity()).amax();
    let det = r.determinant();
    if det <= 0.0 {
        f64::INFINITY
    } else {
        orth.max((det - 1.0).abs())
    }
}

/// Lie-algebra coordinates of a tangent vector at `x`.
pub(crate) fn body_velocity(x: &DVector<f64>, v: &DVector<f64>) -> Vector3<f64> {
    vee(&skew_part(&(to_mat(x).transpose() * to_mat(v))))
}

pub(crate) fn exp(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let r = to_mat(x);
    let w = body_velocity(x, v);
    from_mat(&orthonormalize(&(r * exp_so3(&w))))
}

fn relative(x: &DVector<f64>, y: &DVector<f64>) -> Matrix3<f64> {
    to_mat(x).transpose() * to_mat(y)
}

pub(crate) fn relative_log(x: &DVector<f64>, y: &DVector<f64>, margin: f64) -> Option<Vector3<f64>> {
    log_so3(&relative(x, y), margin)
}

pub(crate) fn log(x: &DVector<f64>, y: &DVector<f64>, margin: f64) -> Option<DVector<f64>> {
    let w = relative_log(x, y, margin)?;
    Some(from_mat(&(to_mat(x) * hat(&w))))
}

pub(crate) fn dist(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    rotation_angle(&relative(x, y))
}

/// Transport along `x exp(t xi)`: the body velocity is conjugated by `exp(-xi/2)`.
pub(crate) fn transport(
    x: &DVector<f64>,
    y: &DVector<f64>,
    v: &DVector<f64>,
    margin: f64,
) -> Option<DVector<f64>> {
    let xi = relative_log(x, y, margin)?;
    let omega = hat(&body_velocity(x, v));
    let half = exp_so3(&(xi * 0.5));
    let moved = half.transpose() * omega * half;
    Some(project_tangent(y, &from_mat(&(to_mat(y) * moved))))
}

/// Derivative of `log_x` at `y` applied to `w` in `T_y`, expressed in `T_x`.
pub(crate) fn log_differential(
    x: &DVector<f64>,
    y: &DVector<f64>,
    w: &DVector<f64>,
    margin: f64,
) -> Option<DVector<f64>> {
    let xi = relative_log(x, y, margin)?;
    let body = body_velocity(y, w);
    let rate = right_jacobian_inv(&xi) * body;
    Some(from_mat(&(to_mat(x) * hat(&rate))))
}
