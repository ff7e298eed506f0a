use serde::{Deserialize, Serialize};

use super::{flow_at, TimeVaryingField};
use crate::error::{Error, Result};
use crate::manifold::{distance, log_map, parallel_transport, ManifoldPoint};
use crate::tolerances::{CUT_LOCUS_MARGIN, ENVELOPE_SLACK};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSample {
    pub tau: f64,
    pub distance: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub samples: Vec<EnvelopeSample>,
    /// Smallest `d (1 + slack) - lower`; negative means the lower envelope failed.
    pub worst_lower_margin: f64,
    /// Smallest `upper (1 + slack) - d`.
    pub worst_upper_margin: f64,
    /// Grid times at which the pair came close to a cut locus; those samples are not checked.
    pub cut_locus_times: Vec<f64>,
    pub pass: bool,
}

/// Checks `d e^{-L s} <= d(phi(tau), phi(tau)) <= d e^{L s}`, `s = tau - t`, on a time grid.
pub fn contraction_envelope_check(
    field: &TimeVaryingField,
    l: f64,
    x1: &ManifoldPoint,
    x2: &ManifoldPoint,
    t: f64,
    tau_grid: &[f64],
    step: f64,
) -> Result<ContractionReport> {
    if !(l >= 0.0) {
        return Err(Error::InvalidArgument(format!("Lipschitz constant must be non-negative, got {l}")));
    }
    let d0 = distance(x1, x2)?;
    let p1 = flow_at(field, t, x1, tau_grid, step)?;
    let p2 = flow_at(field, t, x2, tau_grid, step)?;
    let cut = x1.kind().injectivity_radius() - CUT_LOCUS_MARGIN;
    let mut samples = Vec::with_capacity(tau_grid.len());
    let mut cut_locus_times = Vec::new();
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    for ((&tau, a), b) in tau_grid.iter().zip(&p1).zip(&p2) {
        let d = distance(a, b)?;
        if d > cut {
            cut_locus_times.push(tau);
            continue;
        }
        let s = tau - t;
        let lower = d0 * (-l * s).exp();
        let upper = d0 * (l * s).exp();
        worst_lower = worst_lower.min(d * (1.0 + ENVELOPE_SLACK) - lower);
        worst_upper = worst_upper.min(upper * (1.0 + ENVELOPE_SLACK) - d);
        samples.push(EnvelopeSample { tau, distance: d, lower, upper });
    }
    if !cut_locus_times.is_empty() {
        log::warn!(
            "{}: pair came within {CUT_LOCUS_MARGIN:e} of the cut locus at {} grid times",
            field.name(),
            cut_locus_times.len()
        );
    }
    let pass = worst_lower >= 0.0 && worst_upper >= 0.0;
    Ok(ContractionReport {
        samples,
        worst_lower_margin: worst_lower,
        worst_upper_margin: worst_upper,
        cut_locus_times,
        pass,
    })
}

/// Instantaneous rate of change of `d(phi(.; t, x1), phi(.; t, x2))` at time `t`:
/// `<u, P_{x2}^{x1} f(t, x2) - f(t, x1)>` with `u` the unit direction from `x1` to `x2`.
pub fn distance_rate(field: &TimeVaryingField, t: f64, x1: &ManifoldPoint, x2: &ManifoldPoint) -> Result<f64> {
    let g = log_map(x1, x2)?;
    let d = g.norm();
    if d < crate::tolerances::DEGENERATE_PAIR_DIST {
        return Err(Error::Degenerate("distance rate needs distinct points".into()));
    }
    let u = g.scale(1.0 / d);
    let back = parallel_transport(x2, x1, &field.eval(t, x2)?)?;
    let rel = back.sub(&field.eval(t, x1)?)?;
    crate::manifold::inner(x1, &u, &rel)
}
