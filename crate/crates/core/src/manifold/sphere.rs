//! Unit sphere S^n embedded in R^{n+1} with the induced metric.
//!
//! Geodesics are great circles. For `x`, `v` with `theta = |v|`:
//!
//! ```text
//! exp_x(v) = cos(theta) x + sin(theta) v / theta
//! ```
//!
//! and transport along the minimizing arc from `x` to `y` is
//! `w - <y, w> / (1 + <x, y>) (x + y)`.

use nalgebra::DVector;

pub(crate) fn project_point(c: &DVector<f64>) -> DVector<f64> {
    c / c.norm()
}

pub(crate) fn project_tangent(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    v - x * x.dot(v)
}

pub(crate) fn constraint_residual(c: &DVector<f64>) -> f64 {
    (c.norm() - 1.0).abs()
}

pub(crate) fn exp(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let theta = v.norm();
    let out = if theta < 1e-8 {
        x * (1.0 - 0.5 * theta * theta) + v * (1.0 - theta * theta / 6.0)
    } else {
        x * theta.cos() + v * (theta.sin() / theta)
    };
    project_point(&out)
}

/// Tangent direction at `x` pointing at `y`, of norm `sin(angle)`, and the angle itself.
fn chord(x: &DVector<f64>, y: &DVector<f64>) -> (DVector<f64>, f64) {
    let diff = y - x;
    // y - <x,y> x written through the difference keeps accuracy for nearby points
    let w = &diff - x * x.dot(&diff);
    let s = w.norm();
    let c = x.dot(y);
    (w, s.atan2(c))
}

pub(crate) fn angle(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    chord(x, y).1
}

/// Returns `None` when `y` is antipodal to `x` (within the cut-locus margin).
pub(crate) fn log(x: &DVector<f64>, y: &DVector<f64>, margin: f64) -> Option<DVector<f64>> {
    let (w, theta) = chord(x, y);
    if theta > std::f64::consts::PI - margin {
        return None;
    }
    let s = w.norm();
    if s == 0.0 {
        return Some(DVector::zeros(x.len()));
    }
    Some(w * (theta / s))
}

pub(crate) fn transport(x: &DVector<f64>, y: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let denom = 1.0 + x.dot(y);
    let out = v - (x + y) * (y.dot(v) / denom);
    project_tangent(y, &out)
}
