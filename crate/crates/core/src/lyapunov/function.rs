use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::massera::{massera_g, MasseraFunction};
use crate::certifier::KlEnvelope;
use crate::error::{Error, Result};
use crate::flow::{flow_at, flow_endpoint, timed_lie_derivative, TimeVaryingField};
use crate::manifold::{distance, exp_map, ManifoldPoint, TangentVector};
use crate::tolerances::{DEFAULT_SIMPSON_NODES, DEFAULT_STEP, DIFFERENTIAL_EPS, LIE_STEP, MASSERA_TAIL_MAX};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `V = int_t^{t+delta} d^p`.
    #[serde(rename = "exp")]
    Exponential,
    /// `V = int_t^{t+T} G(d)` with a Massera reshaping `G`.
    Massera,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exponential => "exp",
            Mode::Massera => "massera",
        })
    }
}

/// Composite Simpson rule on an odd number of equally spaced nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrature {
    pub n_nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            n_nodes: DEFAULT_SIMPSON_NODES,
        }
    }
}

impl Quadrature {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 3 || n_nodes.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "Simpson rule needs an odd node count >= 3, got {n_nodes}"
            )));
        }
        Ok(Quadrature { n_nodes })
    }

    fn weights(&self, length: f64) -> Vec<f64> {
        let n = self.n_nodes;
        let h = length / (n - 1) as f64;
        (0..n)
            .map(|i| {
                let w = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect()
    }
}

/// A converse Lyapunov function: an integral of a distance profile along the flow.
///
/// `V(t, x) = int_t^{t+H} w(d(phi(tau; t, x), x*)) dtau` with `w(d) = d^p`
/// (exponential mode, `H = delta`) or `w = G` (Massera mode, `H = T_max`).
/// Integration uses one trajectory through the Simpson nodes, so `V` is smooth
/// in `(t, x)` up to rounding.
#[derive(Clone, Debug)]
pub struct LyapunovFunction {
    field: TimeVaryingField,
    x_star: ManifoldPoint,
    horizon: f64,
    p: f64,
    quadrature: Quadrature,
    mode: Mode,
    step: f64,
    massera: Option<Arc<MasseraFunction>>,
    tail_bound: f64,
}

fn check_equilibrium(field: &TimeVaryingField, x_star: &ManifoldPoint) -> Result<()> {
    if x_star.kind() != field.kind() {
        return Err(Error::KindMismatch {
            expected: field.kind(),
            found: x_star.kind(),
        });
    }
    match field.equilibrium() {
        Some(e) if distance(e, x_star)? < 1e-10 => Ok(()),
        _ => Err(Error::InvalidArgument(format!(
            "the point is not a declared equilibrium of '{}'",
            field.name()
        ))),
    }
}

/// Exponential-mode function `V(t, x) = int_t^{t+delta} d(phi(tau; t, x), x*)^p dtau`.
pub fn construct_exp_v(field: &TimeVaryingField, x_star: &ManifoldPoint, delta: f64, p: f64) -> Result<LyapunovFunction> {
    check_equilibrium(field, x_star)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must be at least 1, got {p}")));
    }
    Ok(LyapunovFunction {
        field: field.clone(),
        x_star: x_star.clone(),
        horizon: delta,
        p,
        quadrature: Quadrature::default(),
        mode: Mode::Exponential,
        step: DEFAULT_STEP,
        massera: None,
        tail_bound: 0.0,
    })
}

/// Massera-mode function on a KL envelope `beta`: `G` is built from
/// `g(t) = beta(r_max, t)` with weight `h(t) = e^{L t}`, and the improper
/// integral is truncated at `t_max` once its tail is certified below 1e-8.
pub fn construct_ugas_v(
    field: &TimeVaryingField,
    x_star: &ManifoldPoint,
    beta: &KlEnvelope,
    t_max: f64,
    l: f64,
) -> Result<LyapunovFunction> {
    check_equilibrium(field, x_star)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("T_max must be positive, got {t_max}")));
    }
    let (times, g) = beta.strict_profile();
    let g_fn = massera_g(&times, &g, |t| (l * t).exp())?;
    let tail = g_fn.tail_after(t_max);
    if !(tail < MASSERA_TAIL_MAX) {
        return Err(Error::Horizon {
            tail,
            limit: MASSERA_TAIL_MAX,
            horizon: t_max,
        });
    }
    Ok(LyapunovFunction {
        field: field.clone(),
        x_star: x_star.clone(),
        horizon: t_max,
        p: 1.0,
        quadrature: Quadrature::new(257)?,
        mode: Mode::Massera,
        step: 1e-2,
        massera: Some(Arc::new(g_fn)),
        tail_bound: tail,
    })
}

impl LyapunovFunction {
    /// Replaces the integration step used along each quadrature trajectory.
    pub fn with_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        self.step = step;
        Ok(self)
    }

    pub fn with_quadrature(mut self, q: Quadrature) -> Self {
        self.quadrature = q;
        self
    }

    pub fn field(&self) -> &TimeVaryingField {
        &self.field
    }

    pub fn equilibrium(&self) -> &ManifoldPoint {
        &self.x_star
    }

    /// `delta` in exponential mode, `T_max` in Massera mode.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn massera(&self) -> Option<&MasseraFunction> {
        self.massera.as_deref()
    }

    /// Certified bound on the truncated part of the integral (0 in exponential mode).
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Integrand weight `w(d)`.
    pub fn weight(&self, d: f64) -> f64 {
        match &self.massera {
            Some(g) => g.eval(d),
            None => d.powf(self.p),
        }
    }

    pub fn evaluate_v(&self, t: f64, x: &ManifoldPoint) -> Result<f64> {
        if x.kind() != self.x_star.kind() {
            return Err(Error::KindMismatch {
                expected: self.x_star.kind(),
                found: x.kind(),
            });
        }
        let n = self.quadrature.n_nodes;
        let h = self.horizon / (n - 1) as f64;
        let nodes: Vec<f64> = (1..n).map(|i| t + h * i as f64).collect();
        let pts = flow_at(&self.field, t, x, &nodes, self.step)?;
        let weights = self.quadrature.weights(self.horizon);
        let d0 = distance(x, &self.x_star)?;
        let mut sum = weights[0] * self.weight(d0);
        for (w, p) in weights[1..].iter().zip(&pts) {
            sum += w * self.weight(distance(p, &self.x_star)?);
        }
        Ok(sum)
    }

    /// Evaluates `V` at many points in parallel; results keep input order.
    pub fn evaluate_batch(&self, points: &[(f64, ManifoldPoint)]) -> Result<Vec<f64>> {
        points.par_iter().map(|(t, x)| self.evaluate_v(*t, x)).collect()
    }

    /// Timed Lie derivative of `V` along the field.
    pub fn lie_derivative(&self, t: f64, x: &ManifoldPoint) -> Result<f64> {
        timed_lie_derivative(|s, y| self.evaluate_v(s, y), &self.field, t, x, LIE_STEP)
    }

    /// Lie derivative of `V` along another field, e.g. the forced dynamics.
    pub fn lie_derivative_along(&self, field: &TimeVaryingField, t: f64, x: &ManifoldPoint) -> Result<f64> {
        timed_lie_derivative(|s, y| self.evaluate_v(s, y), field, t, x, LIE_STEP)
    }

    /// `w(d(phi(t + H; t, x), x*)) - w(d(x, x*))`, which the Lie derivative equals exactly.
    pub fn telescoping_value(&self, t: f64, x: &ManifoldPoint) -> Result<f64> {
        let end = flow_endpoint(&self.field, t, x, t + self.horizon, self.step)?;
        Ok(self.weight(distance(&end, &self.x_star)?) - self.weight(distance(x, &self.x_star)?))
    }

    /// Directional derivative `dV(t, x)[v]` by a central difference along `exp_x(s v)`.
    pub fn directional_derivative(&self, t: f64, x: &ManifoldPoint, v: &TangentVector) -> Result<f64> {
        let n = v.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        let eps = DIFFERENTIAL_EPS / n;
        let plus = self.evaluate_v(t, &exp_map(x, &v.scale(eps))?)?;
        let minus = self.evaluate_v(t, &exp_map(x, &v.scale(-eps))?)?;
        Ok((plus - minus) / (2.0 * eps))
    }
}
