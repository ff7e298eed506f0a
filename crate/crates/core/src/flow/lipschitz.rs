use serde::{Deserialize, Serialize};

use super::TimeVaryingField;
use crate::error::{Error, Result};
use crate::manifold::sampling::{random_point_in_ball, random_unit_tangent, seeded_rng};
use crate::manifold::{distance, exp_map, parallel_transport, ManifoldPoint};
use crate::tolerances::{COVARIANT_EPS, DEGENERATE_PAIR_DIST, LIPSCHITZ_SAFETY};

/// Geodesic ball used as the sampling region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: ManifoldPoint,
    pub radius: f64,
}

impl Region {
    pub fn new(center: ManifoldPoint, radius: f64) -> Result<Self> {
        let inj = center.kind().injectivity_radius();
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("region radius must be positive, got {radius}")));
        }
        if radius >= inj {
            return Err(Error::InvalidArgument(format!(
                "region radius {radius} reaches the cut locus (injectivity radius {inj})"
            )));
        }
        Ok(Region { center, radius })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// `max |P_p^q f(t,p) - f(t,q)| / d(p,q)` over sampled pairs.
    pub l_transport: f64,
    /// `max |nabla_v f(t,x)|` over sampled points and unit directions.
    pub l_covariant: f64,
    pub region: Region,
    pub samples: usize,
    pub skipped_pairs: usize,
}

impl LipschitzEstimate {
    /// The larger of the two estimators.
    pub fn value(&self) -> f64 {
        self.l_transport.max(self.l_covariant)
    }

    /// `value()` inflated by the safety factor used in envelope checks.
    pub fn safe_value(&self) -> f64 {
        self.value() * LIPSCHITZ_SAFETY
    }
}

/// Sampled Lipschitz constant of `field` on `region`, in the parallel-transport sense.
pub fn lipschitz_estimate(
    field: &TimeVaryingField,
    region: &Region,
    t_samples: &[f64],
    n_pairs: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    if t_samples.is_empty() {
        return Err(Error::InvalidArgument("no sample times".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut l_transport = 0.0_f64;
    let mut l_covariant = 0.0_f64;
    let mut skipped = 0;
    for i in 0..n_pairs {
        let t = t_samples[i % t_samples.len()];
        let p = random_point_in_ball(&region.center, region.radius, &mut rng);
        let q = random_point_in_ball(&region.center, region.radius, &mut rng);
        let d = distance(&p, &q)?;
        if d < DEGENERATE_PAIR_DIST {
            skipped += 1;
        } else {
            let moved = parallel_transport(&p, &q, &field.eval(t, &p)?)?;
            let diff = moved.sub(&field.eval(t, &q)?)?;
            l_transport = l_transport.max(diff.norm() / d);
        }

        let x = random_point_in_ball(&region.center, region.radius, &mut rng);
        let v = random_unit_tangent(&x, &mut rng);
        let xp = exp_map(&x, &v.scale(COVARIANT_EPS))?;
        let xm = exp_map(&x, &v.scale(-COVARIANT_EPS))?;
        let fp = parallel_transport(&xp, &x, &field.eval(t, &xp)?)?;
        let fm = parallel_transport(&xm, &x, &field.eval(t, &xm)?)?;
        l_covariant = l_covariant.max(fp.sub(&fm)?.norm() / (2.0 * COVARIANT_EPS));
    }
    if skipped == n_pairs {
        return Err(Error::Degenerate("every sampled pair was degenerate".into()));
    }
    Ok(LipschitzEstimate {
        l_transport,
        l_covariant,
        region: region.clone(),
        samples: n_pairs,
        skipped_pairs: skipped,
    })
}
