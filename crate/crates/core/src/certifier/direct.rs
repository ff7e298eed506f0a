use rayon::prelude::*;

use super::anchors::DIRECT_LYAPUNOV;
use super::report::{CertificationReport, CheckRow, Comparison};
use crate::error::Result;
use crate::flow::{timed_lie_derivative, TimeVaryingField};
use crate::manifold::{distance, ManifoldPoint};
use crate::tolerances::{CERT_ABS_TOL, CERT_REL_TOL, LIE_STEP};

/// Class-K comparison function; `Power { c, p }` is `c r^p`.
#[derive(Clone)]
pub enum ComparisonFunction {
    Power { c: f64, p: f64 },
    Custom(std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ComparisonFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComparisonFunction::Power { c, p } => write!(f, "Power {{ c: {c}, p: {p} }}"),
            ComparisonFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ComparisonFunction {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ComparisonFunction::Power { c, p } => c * r.powf(*p),
            ComparisonFunction::Custom(f) => f(r),
        }
    }
}

/// Outcome of the direct test, with the exponential rate `c3 / c2` when all
/// three comparison functions are powers of the same order.
#[derive(Clone, Debug)]
pub struct DirectCheck {
    pub report: CertificationReport,
    pub exponential_rate: Option<f64>,
}

/// Checks `W1(d) <= V <= W2(d)` and `L_f V <= -W3(d)` at every grid point.
///
/// Each row's measured value is the worst slack of its inequality (2% relative
/// plus 1e-6 absolute tolerance), to be compared with 0. Failures are rows,
/// not errors.
pub fn direct_lyapunov_check<V>(
    v: V,
    field: &TimeVaryingField,
    x_star: &ManifoldPoint,
    w: [&ComparisonFunction; 3],
    grid: &[(f64, ManifoldPoint)],
) -> Result<DirectCheck>
where
    V: Fn(f64, &ManifoldPoint) -> Result<f64> + Sync,
{
    let values: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|(t, x)| -> Result<(f64, f64, f64)> {
            let d = distance(x, x_star)?;
            Ok((d, v(*t, x)?, timed_lie_derivative(&v, field, *t, x, LIE_STEP)?))
        })
        .collect::<Result<_>>()?;
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut decay = f64::INFINITY;
    for &(d, val, lie) in &values {
        lower = lower.min(val * (1.0 + CERT_REL_TOL) + CERT_ABS_TOL - w[0].eval(d));
        upper = upper.min(w[1].eval(d) * (1.0 + CERT_REL_TOL) + CERT_ABS_TOL - val);
        decay = decay.min(-lie + CERT_ABS_TOL - w[2].eval(d) * (1.0 - CERT_REL_TOL));
    }
    let n = values.len();
    let rows = vec![
        CheckRow::compare("direct-lower", DIRECT_LYAPUNOV, Comparison::AtLeast, 0.0, lower, 0.0, 0.0, n),
        CheckRow::compare("direct-upper", DIRECT_LYAPUNOV, Comparison::AtLeast, 0.0, upper, 0.0, 0.0, n),
        CheckRow::compare("direct-decay", DIRECT_LYAPUNOV, Comparison::AtLeast, 0.0, decay, 0.0, 0.0, n),
    ];
    let exponential_rate = match w {
        [ComparisonFunction::Power { p: p1, .. }, ComparisonFunction::Power { c: c2, p: p2 }, ComparisonFunction::Power { c: c3, p: p3 }]
            if p1 == p2 && p2 == p3 =>
        {
            Some(c3 / c2)
        }
        _ => None,
    };
    Ok(DirectCheck {
        report: CertificationReport::new(field.name(), rows),
        exponential_rate,
    })
}
