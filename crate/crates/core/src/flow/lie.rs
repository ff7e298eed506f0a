use super::{flow_endpoint, TimeVaryingField};
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;

/// Timed Lie derivative `d/ds V(s, phi(s; t, x))` at `s = t`.
///
/// Central difference over `[t - h, t + h]`, the backward point obtained by
/// integrating the field in reverse time. When `t - h` falls before the
/// field's time origin the second-order forward difference is used.
pub fn timed_lie_derivative<V>(v: V, field: &TimeVaryingField, t: f64, x: &ManifoldPoint, h: f64) -> Result<f64>
where
    V: Fn(f64, &ManifoldPoint) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    let fwd = flow_endpoint(field, t, x, t + h, h)?;
    if t - h >= field.time_origin() {
        let back = flow_endpoint(field, t, x, t - h, h)?;
        Ok((v(t + h, &fwd)? - v(t - h, &back)?) / (2.0 * h))
    } else {
        let fwd2 = flow_endpoint(field, t + h, &fwd, t + 2.0 * h, h)?;
        Ok((-3.0 * v(t, x)? + 4.0 * v(t + h, &fwd)? - v(t + 2.0 * h, &fwd2)?) / (2.0 * h))
    }
}
