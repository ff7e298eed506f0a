use super::{flow_endpoint, TimeVaryingField};
use crate::error::{Error, Result};
use crate::manifold::{exp_map, log_map, ManifoldPoint, TangentVector};
use crate::tolerances::PUSHFORWARD_EPS;

/// Pushforward `phi(tau; t, .)_* v` of `v` in `T_x`.
///
/// Central difference of the flow along the geodesic `s -> exp_x(s v)`, read
/// in normal coordinates at `phi(tau; t, x)`. The perturbation has length
/// 1e-5; it is shrunk by 10x (twice) if the stencil meets a cut locus.
pub fn pushforward(
    field: &TimeVaryingField,
    t: f64,
    x: &ManifoldPoint,
    v: &TangentVector,
    tau: f64,
    step: f64,
) -> Result<TangentVector> {
    if tau < t {
        return Err(Error::InvalidArgument(format!("tau = {tau} precedes t = {t}")));
    }
    let center = flow_endpoint(field, t, x, tau, step)?;
    let n = v.norm();
    if n == 0.0 {
        return Ok(TangentVector::zero(&center));
    }
    if tau == t {
        return Ok(v.clone());
    }
    let mut eps = PUSHFORWARD_EPS / n;
    let mut last = None;
    for _ in 0..3 {
        match stencil(field, t, x, v, tau, step, &center, eps) {
            Err(e @ Error::CutLocus { .. }) => {
                last = Some(e);
                eps *= 0.1;
            }
            other => return other,
        }
    }
    Err(last.expect("loop ran"))
}

#[allow(clippy::too_many_arguments)]
fn stencil(
    field: &TimeVaryingField,
    t: f64,
    x: &ManifoldPoint,
    v: &TangentVector,
    tau: f64,
    step: f64,
    center: &ManifoldPoint,
    eps: f64,
) -> Result<TangentVector> {
    let plus = flow_endpoint(field, t, &exp_map(x, &v.scale(eps))?, tau, step)?;
    let minus = flow_endpoint(field, t, &exp_map(x, &v.scale(-eps))?, tau, step)?;
    let a = log_map(center, &plus)?;
    let b = log_map(center, &minus)?;
    Ok(a.sub(&b)?.scale(0.5 / eps))
}
