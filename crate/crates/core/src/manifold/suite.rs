//! Randomized property suite for the geometry kernel.

use serde::Serialize;
use serde_json::json;

use super::sampling::{random_point, random_tangent, random_unit_tangent, seeded_rng, SampleRng};
use super::{
    distance, exp_map, first_variation_residual, inner, log_map, parallel_transport,
    EndpointVariation, ManifoldKind, ManifoldPoint, TangentVector,
};
use crate::error::Result;
use crate::tolerances::PROJECTED_CONSTRAINT_TOL;

/// Deliberate faults used to check that the suite detects broken kernels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GeometryFault {
    #[default]
    None,
    /// Scales every exp output by `1 + 1e-6` instead of projecting it.
    SkipRenormalization,
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub n: usize,
    pub seed: u64,
    /// Step of the coarse first-variation difference; the fine one uses `h / 2`.
    pub variation_step: f64,
    pub fault: GeometryFault,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            n: 1000,
            seed: 0,
            variation_step: 1e-2,
            fault: GeometryFault::None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub anchor: String,
    pub threshold: f64,
    pub worst: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_sample: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometrySuiteReport {
    pub manifold: ManifoldKind,
    pub seed: u64,
    pub n: usize,
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

impl GeometrySuiteReport {
    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Tracks the worst sample of an upper-bounded quantity.
struct Worst {
    value: f64,
    sample: Option<serde_json::Value>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: f64::NEG_INFINITY,
            sample: None,
        }
    }

    fn observe(&mut self, value: f64, sample: impl FnOnce() -> serde_json::Value) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        if value > self.value {
            self.value = value;
            self.sample = Some(sample());
        }
    }

    fn finish(self, name: &str, anchor: &str, threshold: f64) -> PropertyResult {
        let pass = self.value <= threshold;
        PropertyResult {
            name: name.into(),
            anchor: anchor.into(),
            threshold,
            worst: self.value.max(0.0),
            pass,
            failing_sample: if pass { None } else { self.sample },
        }
    }
}

fn safe_radius(kind: ManifoldKind) -> f64 {
    match kind {
        ManifoldKind::Sphere(_) | ManifoldKind::So3 => std::f64::consts::PI - 0.01,
        _ => 3.0,
    }
}

fn apply_fault(fault: GeometryFault, p: ManifoldPoint) -> ManifoldPoint {
    match fault {
        GeometryFault::None => p,
        GeometryFault::SkipRenormalization => {
            ManifoldPoint::from_raw(p.kind(), p.raw() * (1.0 + 1e-6))
        }
    }
}

/// Random pair whose distance lies in `[lo, hi]`.
fn random_pair(kind: ManifoldKind, lo: f64, hi: f64, rng: &mut SampleRng) -> (ManifoldPoint, ManifoldPoint) {
    loop {
        let x = random_point(kind, rng);
        let y = random_point(kind, rng);
        let d = distance(&x, &y).expect("same kind");
        if d >= lo && d <= hi {
            return (x, y);
        }
    }
}

fn coords(p: &ManifoldPoint) -> Vec<f64> {
    p.coords().to_vec()
}

fn tangent_json(v: &TangentVector) -> serde_json::Value {
    json!({ "base": v.base().coords(), "coords": v.components() })
}

/// Runs round-trip, constraint, transport isometry, triangle inequality and
/// first-variation convergence checks on `opts.n` random samples.
pub fn run_geometry_suite(kind: ManifoldKind, opts: &SuiteOptions) -> Result<GeometrySuiteReport> {
    let mut rng = seeded_rng(opts.seed);
    let n = opts.n.max(1);
    let radius = safe_radius(kind);

    let mut roundtrip = Worst::new();
    let mut constraint = Worst::new();
    for _ in 0..n {
        let x = random_point(kind, &mut rng);
        let v = random_tangent(&x, radius, &mut rng);
        let y = apply_fault(opts.fault, exp_map(&x, &v)?);
        constraint.observe(y.constraint_residual(), || json!({ "point": coords(&y) }));
        let err = match log_map(&x, &y) {
            Ok(w) => w.sub(&v)?.norm(),
            Err(_) => f64::INFINITY,
        };
        roundtrip.observe(err, || json!({ "x": coords(&x), "v": tangent_json(&v) }));
    }

    let mut isometry = Worst::new();
    let mut log_consistency = Worst::new();
    for _ in 0..n {
        let (x, y) = random_pair(kind, 0.0, radius, &mut rng);
        let u = random_tangent(&x, 2.0, &mut rng);
        let v = random_tangent(&x, 2.0, &mut rng);
        let pu = parallel_transport(&x, &y, &u)?;
        let pv = parallel_transport(&x, &y, &v)?;
        let gap = (inner(&y, &pu, &pv)? - inner(&x, &u, &v)?).abs();
        isometry.observe(gap, || {
            json!({ "x": coords(&x), "y": coords(&y), "u": tangent_json(&u), "v": tangent_json(&v) })
        });
        let d = distance(&x, &y)?;
        let gap = (log_map(&x, &y)?.norm() - d).abs() / (1.0 + d);
        log_consistency.observe(gap, || json!({ "x": coords(&x), "y": coords(&y) }));
    }

    let mut triangle = Worst::new();
    for _ in 0..n {
        let x = random_point(kind, &mut rng);
        let y = random_point(kind, &mut rng);
        let z = random_point(kind, &mut rng);
        let slack = distance(&x, &y)? + distance(&y, &z)? - distance(&x, &z)?;
        triangle.observe(-slack, || {
            json!({ "x": coords(&x), "y": coords(&y), "z": coords(&z) })
        });
    }

    let h = opts.variation_step;
    let (mut coarse, mut fine) = (0.0, 0.0);
    for _ in 0..n {
        let (x, y) = random_pair(kind, 0.3, radius.min(2.5), &mut rng);
        let a = random_unit_tangent(&x, &mut rng);
        let b = random_unit_tangent(&y, &mut rng);
        let var = EndpointVariation::new(&x, &y, &a, &b)?;
        coarse += first_variation_residual(&x, &y, &var, h)?;
        fine += first_variation_residual(&x, &y, &var, h / 2.0)?;
    }
    let ratio = fine / coarse;
    let fv_pass = (0.15..=0.35).contains(&ratio);
    let first_variation = PropertyResult {
        name: "first_variation_order".into(),
        anchor: "first-variation".into(),
        threshold: 0.35,
        worst: ratio,
        pass: fv_pass,
        failing_sample: (!fv_pass).then(|| json!({ "coarse_sum": coarse, "fine_sum": fine, "h": h })),
    };

    let properties = vec![
        roundtrip.finish("exp_log_roundtrip", "exp-log-roundtrip", 1e-8),
        constraint.finish("exp_constraint", "exp-log-roundtrip", PROJECTED_CONSTRAINT_TOL),
        isometry.finish("transport_isometry", "transport-isometry", 1e-10),
        log_consistency.finish("log_norm_distance", "exp-log-roundtrip", 1e-12),
        triangle.finish("triangle_inequality", "triangle-inequality", 1e-9),
        first_variation,
    ];
    let pass = properties.iter().all(|p| p.pass);
    Ok(GeometrySuiteReport {
        manifold: kind,
        seed: opts.seed,
        n,
        properties,
        pass,
    })
}
