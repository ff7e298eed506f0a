use std::io::Write;

use serde::{Deserialize, Serialize};

use super::TimeVaryingField;
use crate::error::{Error, Result};
use crate::manifold::{distance, exp_map, log_differential, ManifoldPoint, TangentVector};

/// Sampled solution `t -> phi(t; t0, x0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, ManifoldPoint)>,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|(t, _)| *t)
    }

    pub fn points(&self) -> impl Iterator<Item = &ManifoldPoint> + '_ {
        self.samples.iter().map(|(_, x)| x)
    }

    pub fn initial(&self) -> &ManifoldPoint {
        &self.samples[0].1
    }

    pub fn last(&self) -> &ManifoldPoint {
        &self.samples[self.samples.len() - 1].1
    }

    /// Distances to `x_star` at every sample.
    pub fn distances_to(&self, x_star: &ManifoldPoint) -> Result<Vec<f64>> {
        self.points().map(|x| distance(x, x_star)).collect()
    }

    /// Worst ratio `d(x_i, x_{i+1}) / (dt * max |f|)` over consecutive samples,
    /// with `|f|` taken at both ends of the step.
    pub fn reachability_ratio(&self, field: &TimeVaryingField) -> Result<f64> {
        let mut worst = 0.0_f64;
        for w in self.samples.windows(2) {
            let (ta, xa) = &w[0];
            let (tb, xb) = &w[1];
            let speed = field.eval(*ta, xa)?.norm().max(field.eval(*tb, xb)?.norm());
            let d = distance(xa, xb)?;
            if d > 0.0 {
                worst = worst.max(d / ((tb - ta) * speed));
            }
        }
        Ok(worst)
    }

    /// Writes `t, x_0, x_1, ...` rows with a header line.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
        let mut out = csv::Writer::from_writer(w);
        let n = self.samples.first().map_or(0, |(_, x)| x.coords().len());
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        out.write_record(&header).map_err(io)?;
        for (t, x) in &self.samples {
            let mut row = vec![format!("{t:.17e}")];
            row.extend(x.coords().iter().map(|c| format!("{c:.17e}")));
            out.write_record(&row).map_err(io)?;
        }
        out.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv output: {e}")))?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self)
            .map_err(|e| Error::InvalidArgument(format!("json output: {e}")))
    }
}

fn check_args(field: &TimeVaryingField, x0: &ManifoldPoint, step: f64) -> Result<()> {
    if x0.kind() != field.kind() {
        return Err(Error::KindMismatch {
            expected: field.kind(),
            found: x0.kind(),
        });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    Ok(())
}

/// Number of steps covering `[t0, t1]` and the regular step size; the last
/// step is shortened to land on `t1`.
fn step_count(t0: f64, t1: f64, step: f64) -> usize {
    let n = ((t1 - t0).abs() / step * (1.0 - 1e-12)).ceil();
    n as usize
}

fn stage(
    field: &TimeVaryingField,
    x: &ManifoldPoint,
    t: f64,
    v: &TangentVector,
) -> Result<(TangentVector, ManifoldPoint)> {
    let y = exp_map(x, v)?;
    let f = field.eval(t, &y)?;
    Ok((log_differential(x, &y, &f)?, y))
}

/// One fourth-order Runge-Kutta step in normal coordinates centred at `x`.
///
/// Each stage vector is pulled back to `T_x` through the differential of
/// `log_x`, so the classical tableau applies unchanged; `h` may be negative.
pub fn rk4_step(field: &TimeVaryingField, t: f64, x: &ManifoldPoint, h: f64) -> Result<ManifoldPoint> {
    let wrap = |e: Error| match e {
        Error::CutLocus { .. } | Error::BaseMismatch | Error::KindMismatch { .. } => Error::Integration {
            time: t,
            reason: e.to_string(),
        },
        other => other,
    };
    let k1 = field.eval(t, x)?;
    let (k2, _) = stage(field, x, t + 0.5 * h, &k1.scale(0.5 * h)).map_err(wrap)?;
    let (k3, _) = stage(field, x, t + 0.5 * h, &k2.scale(0.5 * h)).map_err(wrap)?;
    let (k4, _) = stage(field, x, t + h, &k3.scale(h)).map_err(wrap)?;
    let incr = k1
        .add(&k2.scale(2.0))
        .and_then(|s| s.add(&k3.scale(2.0)))
        .and_then(|s| s.add(&k4))
        .map_err(wrap)?
        .scale(h / 6.0);
    let next = exp_map(x, &incr).map_err(wrap)?;
    if !next.is_finite() {
        return Err(Error::Integration {
            time: t + h,
            reason: "non-finite state".into(),
        });
    }
    Ok(next)
}

/// Visits `phi(t_k)` on the step grid from `t0` to `t1` (either direction).
fn integrate<F>(field: &TimeVaryingField, t0: f64, x0: &ManifoldPoint, t1: f64, step: f64, mut visit: F) -> Result<ManifoldPoint>
where
    F: FnMut(f64, &ManifoldPoint),
{
    check_args(field, x0, step)?;
    let n = step_count(t0, t1, step);
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut x = x0.clone();
    let mut t = t0;
    visit(t, &x);
    for k in 1..=n {
        let tn = if k == n { t1 } else { t0 + dir * step * k as f64 };
        x = rk4_step(field, t, &x, tn - t)?;
        t = tn;
        visit(t, &x);
    }
    Ok(x)
}

/// Solution of `x' = f(t, x)`, `x(t0) = x0` on `[t0, t1]`, sampled at every step.
pub fn flow(field: &TimeVaryingField, t0: f64, x0: &ManifoldPoint, t1: f64, step: f64) -> Result<Trajectory> {
    if t1 < t0 {
        return Err(Error::InvalidArgument(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    check_args(field, x0, step)?;
    let mut samples = Vec::with_capacity(step_count(t0, t1, step) + 1);
    integrate(field, t0, x0, t1, step, |t, x| samples.push((t, x.clone())))?;
    Ok(Trajectory { samples, t0, t1, step })
}

/// `phi(t1; t0, x0)` without storing the path; `t1 < t0` integrates backwards.
pub fn flow_endpoint(field: &TimeVaryingField, t0: f64, x0: &ManifoldPoint, t1: f64, step: f64) -> Result<ManifoldPoint> {
    integrate(field, t0, x0, t1, step, |_, _| {})
}

/// The flow evaluated at an ascending list of times, each reached exactly.
pub fn flow_at(field: &TimeVaryingField, t0: f64, x0: &ManifoldPoint, times: &[f64], step: f64) -> Result<Vec<ManifoldPoint>> {
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut x = x0.clone();
    for &tk in times {
        if tk < t {
            return Err(Error::InvalidArgument("sample times must be ascending and after t0".into()));
        }
        x = flow_endpoint(field, t, &x, tk, step)?;
        t = tk;
        out.push(x.clone());
    }
    Ok(out)
}

/// `d(phi(t1; t0, x0), phi(t1; t_mid, phi(t_mid; t0, x0)))`.
pub fn semigroup_residual(
    field: &TimeVaryingField,
    t0: f64,
    x0: &ManifoldPoint,
    t_mid: f64,
    t1: f64,
    step: f64,
) -> Result<f64> {
    if !(t0 <= t_mid && t_mid <= t1) {
        return Err(Error::InvalidArgument(format!(
            "need t0 <= t_mid <= t1, got {t0}, {t_mid}, {t1}"
        )));
    }
    let direct = flow_endpoint(field, t0, x0, t1, step)?;
    let mid = flow_endpoint(field, t0, x0, t_mid, step)?;
    let split = flow_endpoint(field, t_mid, &mid, t1, step)?;
    distance(&direct, &split)
}
