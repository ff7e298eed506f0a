//! Variations of geodesics and the first variation of arc length.
//!
//! For a geodesic `F(0, .)` parametrized proportionally to arc length the
//! derivative of the length of `F(t, .)` at `t = 0` reduces to the boundary term
//! `<dF/ds / |dF/ds|, dF/dt>` evaluated between `s = 0` and `s = 1`.

use super::{
    distance, exp_map, geodesic_point, inner, log_map, parallel_transport, ManifoldPoint,
    TangentVector,
};
use crate::error::{Error, Result};

/// A smooth family of curves `F(t, s)`, `s in [0, 1]`, around `t = 0`.
pub trait Variation {
    fn point(&self, t: f64, s: f64) -> Result<ManifoldPoint>;

    /// Transversal field `dF/dt` at `t = 0`.
    fn transversal(&self, s: f64) -> Result<TangentVector>;

    /// Length of the curve `F(t, .)`; the default sums chord distances.
    fn length(&self, t: f64) -> Result<f64> {
        let n = 2048;
        let mut prev = self.point(t, 0.0)?;
        let mut total = 0.0;
        for k in 1..=n {
            let p = self.point(t, k as f64 / n as f64)?;
            total += distance(&prev, &p)?;
            prev = p;
        }
        Ok(total)
    }
}

/// Both endpoints move along geodesics, `F(t, .)` is the minimizing geodesic
/// between the moved endpoints.
#[derive(Clone, Debug)]
pub struct EndpointVariation {
    pub x: ManifoldPoint,
    pub y: ManifoldPoint,
    pub start_velocity: TangentVector,
    pub end_velocity: TangentVector,
}

impl EndpointVariation {
    pub fn new(
        x: &ManifoldPoint,
        y: &ManifoldPoint,
        start_velocity: &TangentVector,
        end_velocity: &TangentVector,
    ) -> Result<Self> {
        if !start_velocity.base().approx_eq(x) || !end_velocity.base().approx_eq(y) {
            return Err(Error::BaseMismatch);
        }
        Ok(EndpointVariation {
            x: x.clone(),
            y: y.clone(),
            start_velocity: start_velocity.clone(),
            end_velocity: end_velocity.clone(),
        })
    }

    fn endpoints(&self, t: f64) -> Result<(ManifoldPoint, ManifoldPoint)> {
        Ok((
            exp_map(&self.x, &self.start_velocity.scale(t))?,
            exp_map(&self.y, &self.end_velocity.scale(t))?,
        ))
    }
}

impl Variation for EndpointVariation {
    fn point(&self, t: f64, s: f64) -> Result<ManifoldPoint> {
        let (a, b) = self.endpoints(t)?;
        geodesic_point(&a, &b, s)
    }

    fn transversal(&self, s: f64) -> Result<TangentVector> {
        if s <= 0.0 {
            return Ok(self.start_velocity.clone());
        }
        if s >= 1.0 {
            return Ok(self.end_velocity.clone());
        }
        let p = geodesic_point(&self.x, &self.y, s)?;
        let h = 1e-6;
        let a = log_map(&p, &self.point(h, s)?)?;
        let b = log_map(&p, &self.point(-h, s)?)?;
        Ok(a.sub(&b)?.scale(0.5 / h))
    }

    fn length(&self, t: f64) -> Result<f64> {
        let (a, b) = self.endpoints(t)?;
        distance(&a, &b)
    }
}

/// Interior bump `F(t, s) = exp(gamma(s), t sin(pi s) P n)` with both endpoints fixed,
/// where `n` at `x` is transported along the geodesic.
#[derive(Clone, Debug)]
pub struct BumpVariation {
    pub x: ManifoldPoint,
    pub y: ManifoldPoint,
    pub direction: TangentVector,
}

impl BumpVariation {
    fn field(&self, s: f64) -> Result<(ManifoldPoint, TangentVector)> {
        let p = geodesic_point(&self.x, &self.y, s)?;
        let n = parallel_transport(&self.x, &p, &self.direction)?;
        Ok((p, n.scale((std::f64::consts::PI * s).sin())))
    }
}

impl Variation for BumpVariation {
    fn point(&self, t: f64, s: f64) -> Result<ManifoldPoint> {
        let (p, n) = self.field(s)?;
        exp_map(&p, &n.scale(t))
    }

    fn transversal(&self, s: f64) -> Result<TangentVector> {
        Ok(self.field(s)?.1)
    }
}

/// Finite-difference length derivative and boundary term, in that order.
pub fn first_variation_terms(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    variation: &dyn Variation,
    h: f64,
) -> Result<(f64, f64)> {
    if h <= 0.0 {
        return Err(Error::InvalidArgument("step h must be positive".into()));
    }
    let ell = distance(x, y)?;
    if ell < 1e-12 {
        return Err(Error::Degenerate(
            "first variation needs distinct endpoints".into(),
        ));
    }
    let start = variation.point(0.0, 0.0)?;
    let end = variation.point(0.0, 1.0)?;
    if distance(&start, x)? > 1e-9 || distance(&end, y)? > 1e-9 {
        return Err(Error::InvalidArgument(
            "variation does not start on the geodesic from x to y".into(),
        ));
    }
    let derivative = (variation.length(h)? - variation.length(-h)?) / (2.0 * h);

    let u_start = log_map(x, y)?.scale(1.0 / ell);
    let u_end = log_map(y, x)?.scale(-1.0 / ell);
    let boundary = inner(y, &u_end, &variation.transversal(1.0)?)?
        - inner(x, &u_start, &variation.transversal(0.0)?)?;
    Ok((derivative, boundary))
}

/// `|d/dt length(F(t, .)) - boundary term|` with a central difference of step `h`.
pub fn first_variation_residual(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    variation: &dyn Variation,
    h: f64,
) -> Result<f64> {
    let (d, b) = first_variation_terms(x, y, variation, h)?;
    Ok((d - b).abs())
}
