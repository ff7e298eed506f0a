//! Built-in systems addressable by name from scenario files.

use geolyap_core::flow::TimeVaryingField;
use geolyap_core::manifold::ManifoldPoint;
use geolyap_core::systems;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

type Build = fn(&ManifoldPoint, &Params) -> geolyap_core::Result<TimeVaryingField>;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SystemEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Parameter names with their defaults.
    pub params: &'static [(&'static str, f64)],
    /// Whether the distance to the equilibrium has a closed form.
    pub closed_form_decay: bool,
    #[serde(skip)]
    build: Build,
}

pub struct Params<'a> {
    entry: &'a SystemEntry,
    given: &'a Map<String, Value>,
}

impl Params<'_> {
    fn get(&self, name: &str) -> f64 {
        self.given
            .get(name)
            .and_then(Value::as_f64)
            .or_else(|| self.entry.params.iter().find(|(n, _)| *n == name).map(|(_, d)| *d))
            .expect("parameter is declared")
    }
}

pub const SYSTEMS: &[SystemEntry] = &[
    SystemEntry {
        name: "geodesic_attractor",
        description: "f = rate log_x(x*); distance decays as e^{-rate t}",
        params: &[("rate", 1.0)],
        closed_form_decay: true,
        build: |x, p| systems::geodesic_attractor(x, p.get("rate")),
    },
    SystemEntry {
        name: "time_varying_attractor",
        description: "gain mean + amplitude sin t along log_x(x*)",
        params: &[("mean", 1.5), ("amplitude", 0.5)],
        closed_form_decay: true,
        build: |x, p| systems::time_varying_attractor(x, p.get("mean"), p.get("amplitude")),
    },
    SystemEntry {
        name: "cubic_slowdown",
        description: "d' = -rate d^3; asymptotically but not exponentially stable",
        params: &[("rate", 1.0)],
        closed_form_decay: true,
        build: |x, p| systems::cubic_slowdown(x, p.get("rate")),
    },
    SystemEntry {
        name: "isometric_rotation",
        description: "Killing field fixing x*; stable, distances conserved",
        params: &[("rate", 1.0)],
        closed_form_decay: true,
        build: |x, p| systems::isometric_rotation(x, p.get("rate")),
    },
    SystemEntry {
        name: "zero",
        description: "f = 0; every point is an equilibrium",
        params: &[],
        closed_form_decay: true,
        build: |x, _| Ok(systems::zero(x.kind())),
    },
];

pub fn lookup(name: &str) -> Result<&'static SystemEntry, CliError> {
    SYSTEMS.iter().find(|e| e.name == name).ok_or_else(|| {
        let known: Vec<_> = SYSTEMS.iter().map(|e| e.name).collect();
        CliError::config(format!("unknown system {name:?}; known systems: {}", known.join(", ")))
    })
}

pub fn build(name: &str, params: &Map<String, Value>, x_star: &ManifoldPoint) -> Result<TimeVaryingField, CliError> {
    let entry = lookup(name)?;
    for (k, v) in params {
        if !entry.params.iter().any(|(n, _)| n == k) {
            return Err(CliError::config(format!("system {name} has no parameter {k:?}")));
        }
        if !v.as_f64().is_some_and(f64::is_finite) {
            return Err(CliError::config(format!("parameter {k} of {name} must be a number")));
        }
    }
    let field = (entry.build)(x_star, &Params { entry, given: params }).map_err(|e| CliError::config(format!("system {name}: {e}")))?;
    // The zero field fixes every point, so the declared equilibrium is the requested one.
    if entry.name == "zero" {
        return field.with_equilibrium(x_star.clone()).map_err(|e| CliError::config(e.to_string()));
    }
    Ok(field)
}
