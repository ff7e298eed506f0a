use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::K_PRIME_MIN;

/// Horizon `delta` together with the envelope it was chosen for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaChoice {
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda: f64,
    pub delta: f64,
    #[serde(rename = "K_prime")]
    pub k_prime: f64,
}

/// Smallest horizon with `K' = 1 - K e^{-lambda delta}` equal to `target`.
pub fn choose_delta(k: f64, lambda: f64, target: f64) -> Result<DeltaChoice> {
    choose_delta_p(k, lambda, target, 1.0)
}

/// Power-`p` variant: `K' = 1 - K^p e^{-p lambda delta}`.
pub fn choose_delta_p(k: f64, lambda: f64, target: f64, p: f64) -> Result<DeltaChoice> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!("target K' must lie in (0, 1), got {target}")));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("K must be at least 1, got {k}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must be at least 1, got {p}")));
    }
    let delta = (p * k.ln() - (1.0 - target).ln()) / (p * lambda);
    Ok(DeltaChoice {
        k,
        lambda,
        delta,
        k_prime: k_prime(k, lambda, delta, p),
    })
}

pub(crate) fn k_prime(k: f64, lambda: f64, delta: f64, p: f64) -> f64 {
    1.0 - k.powf(p) * (-p * lambda * delta).exp()
}

/// Rejects horizons for which `K'` is not safely positive.
pub fn check_delta(k: f64, lambda: f64, delta: f64, p: f64) -> Result<f64> {
    let kp = k_prime(k, lambda, delta, p);
    if !(kp > K_PRIME_MIN) || !(delta > 0.0) {
        return Err(Error::InvalidDelta {
            k,
            lambda,
            delta,
            k_prime: kp,
        });
    }
    Ok(kp)
}
