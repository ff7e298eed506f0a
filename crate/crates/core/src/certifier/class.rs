use std::fmt;

use serde::{Deserialize, Serialize};

/// Stability classes recognised from trajectory data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    /// Uniformly stable: bounded by a class-K function of the initial distance.
    #[serde(rename = "US")]
    Us,
    /// Uniformly asymptotically stable: bounded by a class-KL envelope.
    #[serde(rename = "UAS")]
    Uas,
    /// Exponentially stable on the sampled region.
    #[serde(rename = "LES")]
    Les,
    #[serde(rename = "UGAS-sampled")]
    UgasSampled,
    #[serde(rename = "UGES-sampled")]
    UgesSampled,
}

impl StabilityClass {
    pub fn is_exponential(&self) -> bool {
        matches!(self, StabilityClass::Les | StabilityClass::UgesSampled)
    }

    pub fn is_asymptotic(&self) -> bool {
        !matches!(self, StabilityClass::Us)
    }

    /// The global-sampling counterpart of a local class.
    pub fn globalized(self) -> Self {
        match self {
            StabilityClass::Les => StabilityClass::UgesSampled,
            StabilityClass::Uas => StabilityClass::UgasSampled,
            other => other,
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StabilityClass::Us => "US",
            StabilityClass::Uas => "UAS",
            StabilityClass::Les => "LES",
            StabilityClass::UgasSampled => "UGAS-sampled",
            StabilityClass::UgesSampled => "UGES-sampled",
        };
        f.write_str(s)
    }
}
