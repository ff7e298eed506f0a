use serde::{Deserialize, Serialize};

use super::delta::check_delta;
use crate::error::{Error, Result};

/// Constants of the converse construction `V = int_t^{t+delta} d^p`:
/// `c1 d^p <= V <= c2 d^p`, `L_f V <= -c3 V` and `|dV| <= c4 d^{p-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalBounds {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    #[serde(rename = "K_prime")]
    pub k_prime: f64,
    /// `K^p (1 - e^{-p lambda delta}) / (p L)`, the upper constant normalised by
    /// `L` instead of `lambda`. Reported alongside `c2`, never used in checks.
    pub c2_lipschitz_normalized: f64,
}

/// `(e^{a delta} - 1) / a`, continuous through `a = 0`.
fn growth_integral(a: f64, delta: f64) -> f64 {
    if (a * delta).abs() < 1e-8 {
        delta * (1.0 + 0.5 * a * delta)
    } else {
        (a * delta).exp_m1() / a
    }
}

pub fn theoretical_bounds(l: f64, k: f64, lambda: f64, delta: f64, p: f64) -> Result<TheoreticalBounds> {
    for (name, v) in [("L", l), ("lambda", lambda), ("delta", delta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if !(k >= 1.0) || !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("need K >= 1 and p >= 1, got K = {k}, p = {p}")));
    }
    let k_prime = check_delta(k, lambda, delta, p)?;
    let kp = k.powf(p);
    let c1 = -(-p * l * delta).exp_m1() / (p * l);
    let decay = -(-p * lambda * delta).exp_m1();
    let c2 = kp * decay / (p * lambda);
    let c3 = k_prime / c2;
    let c4 = p * k.powf(p - 1.0) * growth_integral(l - (p - 1.0) * lambda, delta);
    Ok(TheoreticalBounds {
        c1,
        c2,
        c3,
        c4,
        k_prime,
        c2_lipschitz_normalized: kp * decay / (p * l),
    })
}
