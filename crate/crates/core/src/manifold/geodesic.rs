use serde::{Deserialize, Serialize};

use super::{exp_map, log_map, parallel_transport, ManifoldPoint, TangentVector};
use crate::error::{Error, Result};

/// `exp_map(x, s * log_map(x, y))`.
pub fn geodesic_point(x: &ManifoldPoint, y: &ManifoldPoint, s: f64) -> Result<ManifoldPoint> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "geodesic parameter {s} outside [0, 1]"
        )));
    }
    if s == 0.0 {
        return Ok(x.clone());
    }
    let v = log_map(x, y)?;
    if s == 1.0 {
        return Ok(y.clone());
    }
    exp_map(x, &v.scale(s))
}

/// Geodesic `s -> exp(start, s * v)` on `s in [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSegment {
    pub start: ManifoldPoint,
    pub initial_velocity: TangentVector,
}

impl GeodesicSegment {
    pub fn new(start: &ManifoldPoint, initial_velocity: &TangentVector) -> Result<Self> {
        if !start.approx_eq(initial_velocity.base()) {
            return Err(Error::BaseMismatch);
        }
        Ok(GeodesicSegment {
            start: start.clone(),
            initial_velocity: initial_velocity.clone(),
        })
    }

    /// Minimizing segment from `x` to `y`.
    pub fn between(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<Self> {
        let v = log_map(x, y)?;
        Ok(GeodesicSegment {
            start: x.clone(),
            initial_velocity: v,
        })
    }

    pub fn point(&self, s: f64) -> Result<ManifoldPoint> {
        exp_map(&self.start, &self.initial_velocity.scale(s))
    }

    pub fn end(&self) -> Result<ManifoldPoint> {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        self.initial_velocity.norm()
    }

    /// Velocity at parameter `s`: the initial velocity transported along the segment.
    pub fn velocity(&self, s: f64) -> Result<TangentVector> {
        let p = self.point(s)?;
        parallel_transport(&self.start, &p, &self.initial_velocity)
    }

    /// Largest covariant acceleration over `n` interior stations, by central
    /// differences of transported difference-quotient velocities.
    pub fn acceleration_residual(&self, n: usize) -> Result<f64> {
        let h = 1e-3;
        let e = 1e-4;
        let velocity_fd = |s: f64| -> Result<(ManifoldPoint, TangentVector)> {
            let p = self.point(s)?;
            let a = log_map(&p, &self.point(s + e)?)?;
            let b = log_map(&p, &self.point(s - e)?)?;
            Ok((p, a.sub(&b)?.scale(0.5 / e)))
        };
        let mut worst: f64 = 0.0;
        for k in 1..=n {
            let s = k as f64 / (n + 1) as f64;
            let (p, _) = velocity_fd(s)?;
            let (pf, vf) = velocity_fd(s + h)?;
            let (pb, vb) = velocity_fd(s - h)?;
            let forward = parallel_transport(&pf, &p, &vf)?;
            let backward = parallel_transport(&pb, &p, &vb)?;
            let acc = forward.sub(&backward)?.scale(0.5 / h);
            worst = worst.max(acc.norm());
        }
        Ok(worst)
    }
}
