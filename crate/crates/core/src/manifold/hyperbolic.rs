//! Hyperbolic plane in the hyperboloid model `<x,x>_M = -1`, `x0 > 0`,
//! with Minkowski form `<x,y>_M = -x0 y0 + x1 y1 + x2 y2`.

use nalgebra::DVector;

pub(crate) fn minkowski(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Lifts the spatial part back onto the upper sheet.
pub(crate) fn project_point(c: &DVector<f64>) -> DVector<f64> {
    let x0 = (1.0 + c[1] * c[1] + c[2] * c[2]).sqrt();
    DVector::from_vec(vec![x0, c[1], c[2]])
}

pub(crate) fn project_tangent(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    v + x * minkowski(x, v)
}

pub(crate) fn constraint_residual(c: &DVector<f64>) -> f64 {
    let r = (minkowski(c, c) + 1.0).abs();
    if c[0] > 0.0 {
        r
    } else {
        f64::INFINITY
    }
}

pub(crate) fn norm(v: &DVector<f64>) -> f64 {
    minkowski(v, v).max(0.0).sqrt()
}

pub(crate) fn exp(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let theta = norm(v);
    let out = if theta < 1e-8 {
        x * (1.0 + 0.5 * theta * theta) + v * (1.0 + theta * theta / 6.0)
    } else {
        x * theta.cosh() + v * (theta.sinh() / theta)
    };
    project_point(&out)
}

fn chord(x: &DVector<f64>, y: &DVector<f64>) -> (DVector<f64>, f64) {
    let diff = y - x;
    let w = &diff + x * minkowski(x, &diff);
    let s = norm(&w);
    (w, s.asinh())
}

pub(crate) fn dist(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    chord(x, y).1
}

pub(crate) fn log(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let (w, theta) = chord(x, y);
    let s = norm(&w);
    if s == 0.0 {
        return DVector::zeros(3);
    }
    w * (theta / s)
}

pub(crate) fn transport(x: &DVector<f64>, y: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let denom = minkowski(x, y) - 1.0;
    let out = v - (x + y) * (minkowski(y, v) / denom);
    project_tangent(y, &out)
}
