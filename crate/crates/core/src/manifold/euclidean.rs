//! Flat space: straight-line geodesics and the identity connection.

use nalgebra::DVector;

pub(crate) fn exp(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    x + v
}

pub(crate) fn log(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    y - x
}

pub(crate) fn dist(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    (y - x).norm()
}
