//! Scenario files: versioned JSON describing a manifold, a registered system
//! and the sampling grids of each command.

use std::path::Path;

use geolyap_core::certifier::{CertifyGrids, DisturbanceSignal, IssOptions, SignalShape, TrajectoryGrid};
use geolyap_core::manifold::{ManifoldKind, ManifoldPoint};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeltaPolicy {
    Explicit { value: f64 },
    /// Smallest horizon with `K' = 1 - K^p e^{-p lambda delta}` equal to `target`.
    Auto { target: f64 },
}

impl Default for DeltaPolicy {
    fn default() -> Self {
        DeltaPolicy::Auto { target: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzSpec {
    pub t_samples: Vec<f64>,
    pub n_pairs: usize,
}

impl Default for LipschitzSpec {
    fn default() -> Self {
        LipschitzSpec { t_samples: vec![0.0, 1.0, std::f64::consts::E, 10.0], n_pairs: 500 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MasseraSpec {
    /// Truncation horizon of the Massera integral.
    pub t_max: f64,
}

impl Default for MasseraSpec {
    fn default() -> Self {
        MasseraSpec { t_max: 20.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub shape: SignalShape,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSpec {
    /// Explicit initial point; otherwise a seeded random point at `initial_distance`.
    pub initial: Option<Vec<f64>>,
    pub initial_distance: f64,
    pub t0_list: Vec<f64>,
    pub horizon: f64,
    pub step: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec { initial: None, initial_distance: 1.0, t0_list: vec![0.0], horizon: 10.0, step: 1e-2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CertifyMode {
    #[default]
    Exp,
    Massera,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub manifold: ManifoldKind,
    pub system: SystemSpec,
    /// Defaults to the manifold origin.
    #[serde(default)]
    pub equilibrium: Option<Vec<f64>>,
    #[serde(default)]
    pub delta: DeltaPolicy,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub mode: CertifyMode,
    /// Classify with the globalized labels (UGES/UGAS-sampled).
    #[serde(default)]
    pub global: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grids: CertifyGrids,
    #[serde(default)]
    pub trajectories: TrajectoryGrid,
    #[serde(default)]
    pub lipschitz: LipschitzSpec,
    #[serde(default)]
    pub massera: MasseraSpec,
    #[serde(default)]
    pub disturbance: Option<DisturbanceSpec>,
    #[serde(default)]
    pub iss: IssOptions,
    #[serde(default)]
    pub flow: FlowSpec,
    /// Output directory, relative to the working directory; `--out` overrides it.
    #[serde(default)]
    pub out: Option<String>,
}

fn default_p() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let cut = self.manifold.injectivity_radius();
        for (what, r) in [
            ("grids.radius", self.grids.radius),
            ("trajectories.radius", self.trajectories.radius),
            ("iss.radius", self.iss.radius),
        ] {
            if !(r > 0.0 && r < cut) {
                return Err(CliError::config(format!("{what} = {r} must lie in (0, {cut})")));
            }
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(CliError::config(format!("p = {} must be >= 1", self.p)));
        }
        match self.delta {
            DeltaPolicy::Explicit { value } if !(value > 0.0 && value.is_finite()) => {
                return Err(CliError::config(format!("delta {value} must be positive")))
            }
            DeltaPolicy::Auto { target } if !(target > 0.0 && target < 1.0) => {
                return Err(CliError::config(format!("delta target {target} must lie in (0, 1)")))
            }
            _ => {}
        }
        if !(self.flow.horizon > 0.0 && self.flow.step > 0.0) || self.flow.t0_list.is_empty() {
            return Err(CliError::config("flow needs horizon > 0, step > 0 and a non-empty t0_list"));
        }
        crate::registry::lookup(&self.system.name)?;
        Ok(())
    }

    /// Replaces the seed and propagates it to every sampling stage.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.grids.seed = self.seed;
        self.trajectories.seed = self.seed.wrapping_add(1);
        self.iss.seed = self.seed.wrapping_add(2);
        self
    }

    pub fn lipschitz_seed(&self) -> u64 {
        self.seed.wrapping_add(3)
    }

    pub fn equilibrium(&self) -> Result<ManifoldPoint, CliError> {
        match &self.equilibrium {
            Some(c) => ManifoldPoint::new(self.manifold, c.clone()).map_err(|e| CliError::config(format!("equilibrium: {e}"))),
            None => Ok(ManifoldPoint::origin(self.manifold)),
        }
    }

    pub fn disturbance(&self) -> Result<DisturbanceSignal, CliError> {
        let d = self.disturbance.as_ref().ok_or_else(|| CliError::config("the iss command needs a disturbance section"))?;
        DisturbanceSignal::new(d.shape.clone(), d.bound).map_err(|e| CliError::config(format!("disturbance: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"schema_version": 1, "name": "m", "manifold": "so3", "system": {"name": "geodesic_attractor"}}"#;

    #[test]
    fn defaults() {
        let c = ScenarioConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.manifold, ManifoldKind::So3);
        assert_eq!(c.delta, DeltaPolicy::Auto { target: 0.5 });
        assert_eq!(c.p, 1.0);
        assert_eq!(c.mode, CertifyMode::Exp);
        assert_eq!(c.grids, CertifyGrids::default());
        assert!(c.equilibrium().unwrap().approx_eq(&ManifoldPoint::origin(ManifoldKind::So3)));
        assert!(c.disturbance().is_err());
    }

    #[test]
    fn seed_reaches_every_stage() {
        let c = ScenarioConfig::parse(MINIMAL).unwrap().with_seed(Some(9));
        assert_eq!((c.seed, c.grids.seed, c.trajectories.seed, c.iss.seed, c.lipschitz_seed()), (9, 9, 10, 11, 12));
    }

    #[test]
    fn delta_policies() {
        let text = MINIMAL.replace("}}", r#"}, "delta": {"policy": "explicit", "value": 0.25}}"#);
        assert_eq!(ScenarioConfig::parse(&text).unwrap().delta, DeltaPolicy::Explicit { value: 0.25 });
        let bad = MINIMAL.replace("}}", r#"}, "delta": {"policy": "auto", "target": 1.5}}"#);
        assert!(matches!(ScenarioConfig::parse(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn shipped_configs_parse() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
        let mut n = 0;
        for e in std::fs::read_dir(dir).unwrap() {
            ScenarioConfig::load(&e.unwrap().path()).unwrap();
            n += 1;
        }
        assert!(n >= 5);
    }
}
