use serde::{Deserialize, Serialize};

use super::{LyapunovFunction, Mode, TheoreticalBounds};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "K_prime")]
    pub k_prime: f64,
    pub c2_lipschitz_normalized: f64,
}

/// Serializable summary of a constructed Lyapunov function and its constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: Mode,
    pub delta: f64,
    pub p: f64,
    pub constants: CertificateConstants,
    pub tail_bound: f64,
}

impl Certificate {
    pub fn new(v: &LyapunovFunction, bounds: &TheoreticalBounds, l: f64, k: f64, lambda: f64) -> Self {
        Certificate {
            mode: v.mode(),
            delta: v.horizon(),
            p: v.p(),
            constants: CertificateConstants {
                c1: bounds.c1,
                c2: bounds.c2,
                c3: bounds.c3,
                c4: bounds.c4,
                k,
                lambda,
                l,
                k_prime: bounds.k_prime,
                c2_lipschitz_normalized: bounds.c2_lipschitz_normalized,
            },
            tail_bound: v.tail_bound(),
        }
    }
}
