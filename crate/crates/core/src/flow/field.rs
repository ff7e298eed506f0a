use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, ManifoldPoint, TangentVector};
use crate::tolerances::EQUILIBRIUM_TOL;

pub type EvalFn = dyn Fn(f64, &ManifoldPoint) -> Result<TangentVector> + Send + Sync;
pub type InputEvalFn = dyn Fn(f64, &ManifoldPoint, &[f64]) -> Result<TangentVector> + Send + Sync;
/// Input signal `t -> u(t)`; failing signals abort the integration.
pub type SignalFn = dyn Fn(f64) -> Result<Vec<f64>> + Send + Sync;

/// A time-varying vector field `f(t, x)` on one manifold.
///
/// Handles are shared behind `Arc` and must be pure, so a field can be
/// evaluated from several threads at once.
#[derive(Clone)]
pub struct TimeVaryingField {
    kind: ManifoldKind,
    name: String,
    eval: Arc<EvalFn>,
    input_eval: Option<Arc<InputEvalFn>>,
    input_dim: usize,
    equilibrium: Option<ManifoldPoint>,
    time_origin: f64,
}

impl fmt::Debug for TimeVaryingField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeVaryingField")
            .field("kind", &self.kind)
            .field("name", &self.name)
            .field("input_dim", &self.input_dim)
            .field("equilibrium", &self.equilibrium)
            .field("time_origin", &self.time_origin)
            .finish()
    }
}

impl TimeVaryingField {
    pub fn new<F>(kind: ManifoldKind, name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64, &ManifoldPoint) -> Result<TangentVector> + Send + Sync + 'static,
    {
        TimeVaryingField {
            kind,
            name: name.into(),
            eval: Arc::new(eval),
            input_eval: None,
            input_dim: 0,
            equilibrium: None,
            time_origin: 0.0,
        }
    }

    /// Attaches the forced dynamics `f(t, x, u)` with inputs in `R^dim`.
    /// The forced field must agree with the unforced one at `u = 0`.
    pub fn with_input<G>(mut self, dim: usize, input_eval: G) -> Self
    where
        G: Fn(f64, &ManifoldPoint, &[f64]) -> Result<TangentVector> + Send + Sync + 'static,
    {
        self.input_eval = Some(Arc::new(input_eval));
        self.input_dim = dim;
        self
    }

    /// Declares `x_star` an equilibrium; rejected unless `|f(t, x_star)| < 1e-10`
    /// at a spread of sample times.
    pub fn with_equilibrium(mut self, x_star: ManifoldPoint) -> Result<Self> {
        if x_star.kind() != self.kind {
            return Err(Error::KindMismatch {
                expected: self.kind,
                found: x_star.kind(),
            });
        }
        for k in 0..16 {
            let t = self.time_origin + 0.77 * k as f64;
            let n = self.eval(t, &x_star)?.norm();
            if n >= EQUILIBRIUM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{}: |f({t}, x*)| = {n:.3e} is not below {EQUILIBRIUM_TOL:e}",
                    self.name
                )));
            }
        }
        self.equilibrium = Some(x_star);
        Ok(self)
    }

    /// Earliest time at which the field is defined.
    pub fn with_time_origin(mut self, t: f64) -> Self {
        self.time_origin = t;
        self
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn equilibrium(&self) -> Option<&ManifoldPoint> {
        self.equilibrium.as_ref()
    }

    pub fn time_origin(&self) -> f64 {
        self.time_origin
    }

    pub fn has_input(&self) -> bool {
        self.input_eval.is_some()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Evaluates `f(t, x)`, checking the kind, base point and finiteness of the result.
    pub fn eval(&self, t: f64, x: &ManifoldPoint) -> Result<TangentVector> {
        if x.kind() != self.kind {
            return Err(Error::KindMismatch {
                expected: self.kind,
                found: x.kind(),
            });
        }
        let v = (self.eval)(t, x)?;
        self.check_output(t, x, v)
    }

    /// Evaluates the forced field `f(t, x, u)`.
    pub fn eval_input(&self, t: f64, x: &ManifoldPoint, u: &[f64]) -> Result<TangentVector> {
        let g = self.input_eval.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("field '{}' has no input channel", self.name))
        })?;
        if u.len() != self.input_dim {
            return Err(Error::InvalidArgument(format!(
                "input has dimension {}, field '{}' expects {}",
                u.len(),
                self.name,
                self.input_dim
            )));
        }
        let v = g(t, x, u)?;
        self.check_output(t, x, v)
    }

    /// The unforced field obtained by feeding the signal `u(t)` into the input channel.
    pub fn forced(&self, signal: Arc<SignalFn>) -> Result<TimeVaryingField> {
        if self.input_eval.is_none() {
            return Err(Error::InvalidArgument(format!(
                "field '{}' has no input channel",
                self.name
            )));
        }
        let base = self.clone();
        let name = format!("{}+input", self.name);
        Ok(TimeVaryingField {
            kind: self.kind,
            name,
            eval: Arc::new(move |t, x| base.eval_input(t, x, &signal(t)?)),
            input_eval: None,
            input_dim: 0,
            equilibrium: None,
            time_origin: self.time_origin,
        })
    }

    fn check_output(&self, t: f64, x: &ManifoldPoint, v: TangentVector) -> Result<TangentVector> {
        if !v.base().approx_eq(x) {
            return Err(Error::FieldEvaluation {
                time: t,
                reason: format!("field '{}' returned a vector based elsewhere", self.name),
            });
        }
        if !v.is_finite() {
            return Err(Error::FieldEvaluation {
                time: t,
                reason: format!("field '{}' returned non-finite components", self.name),
            });
        }
        Ok(v)
    }
}
