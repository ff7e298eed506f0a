use serde::{Deserialize, Serialize};

use super::{anchors, StabilityClass};
use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::manifold::{distance, ManifoldPoint};
use crate::tolerances::{DECAY_FRACTION, DEGENERATE_PAIR_DIST, LES_LAMBDA_MIN, LES_RESIDUAL_MAX};

/// Sampled class-KL bound `beta(r, s)` dominating a set of trajectories.
///
/// Row `i` is the worst distance profile over trajectories with initial
/// distance at most `radii[i]`, made nonincreasing in `s`; rows are
/// nondecreasing in `r` by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlEnvelope {
    pub radii: Vec<f64>,
    pub offsets: Vec<f64>,
    pub table: Vec<Vec<f64>>,
}

impl KlEnvelope {
    pub fn from_profiles(profiles: &[(f64, Vec<f64>)], offsets: &[f64]) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::InvalidArgument("no trajectories to envelope".into()));
        }
        if profiles.iter().any(|(_, p)| p.len() != offsets.len()) {
            return Err(Error::InvalidArgument("trajectories are sampled on different grids".into()));
        }
        let mut order: Vec<usize> = (0..profiles.len()).collect();
        order.sort_by(|&a, &b| profiles[a].0.total_cmp(&profiles[b].0));
        let mut radii = Vec::new();
        let mut table: Vec<Vec<f64>> = Vec::new();
        let mut running = vec![0.0_f64; offsets.len()];
        for &i in &order {
            let (r, p) = &profiles[i];
            running.iter_mut().zip(p).for_each(|(a, b)| *a = a.max(*b));
            let mut row = running.clone();
            for j in (0..row.len().saturating_sub(1)).rev() {
                row[j] = row[j].max(row[j + 1]);
            }
            if radii.last() == Some(r) {
                *table.last_mut().unwrap() = row;
            } else {
                radii.push(*r);
                table.push(row);
            }
        }
        Ok(KlEnvelope {
            radii,
            offsets: offsets.to_vec(),
            table,
        })
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// `beta(r, s)`: the row of the smallest sampled radius `>= r` at the last
    /// offset `<= s`. `None` when `r` exceeds the sampled radii.
    pub fn eval(&self, r: f64, s: f64) -> Option<f64> {
        if r <= 0.0 {
            return Some(0.0);
        }
        let i = self.radii.iter().position(|&ri| ri >= r * (1.0 - 1e-12))?;
        let j = self.offsets.iter().rposition(|&o| o <= s).unwrap_or_default();
        Some(self.table[i][j])
    }

    /// `beta(r_max, .)` on the offset grid, nudged upward where flat so that it
    /// strictly decreases (still an upper bound of every trajectory).
    pub fn strict_profile(&self) -> (Vec<f64>, Vec<f64>) {
        let mut g = self.table.last().unwrap().clone();
        for j in (0..g.len().saturating_sub(1)).rev() {
            let floor = g[j + 1] * (1.0 + 1e-9) + 1e-300;
            if g[j] < floor {
                g[j] = floor;
            }
        }
        (self.offsets.clone(), g)
    }
}

/// Result of fitting trajectories against the stability definitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityEnvelope {
    pub class: StabilityClass,
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda: f64,
    /// RMS log-fit residual normalised by `lambda * s_max`.
    pub residual: f64,
    /// `(r, alpha(r))` with `alpha(r) = max_{s} beta(r, s)`, the class-K bound of stability.
    pub alpha: Vec<(f64, f64)>,
    pub beta: KlEnvelope,
    pub r_min: f64,
    pub r_max: f64,
    pub trajectories: usize,
}

struct Prepared {
    offsets: Vec<f64>,
    profiles: Vec<(f64, Vec<f64>)>,
}

fn prepare(trajectories: &[Trajectory], x_star: &ManifoldPoint) -> Result<Prepared> {
    if trajectories.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 trajectories, got {}",
            trajectories.len()
        )));
    }
    let mut offsets: Option<Vec<f64>> = None;
    let mut profiles = Vec::new();
    for tr in trajectories {
        if tr.is_empty() {
            return Err(Error::InvalidArgument("empty trajectory".into()));
        }
        if tr.initial().kind() != x_star.kind() {
            return Err(Error::KindMismatch {
                expected: x_star.kind(),
                found: tr.initial().kind(),
            });
        }
        let d = tr.distances_to(x_star)?;
        if d[0] < DEGENERATE_PAIR_DIST {
            continue;
        }
        let o: Vec<f64> = tr.times().map(|t| t - tr.t0).collect();
        match &offsets {
            None => offsets = Some(o),
            Some(prev) => {
                if prev.len() != o.len() || prev.iter().zip(&o).any(|(a, b)| (a - b).abs() > 1e-9) {
                    return Err(Error::InvalidArgument(
                        "trajectories must share the same relative time grid".into(),
                    ));
                }
            }
        }
        profiles.push((d[0], d));
    }
    let offsets = offsets.ok_or_else(|| Error::Classification {
        reason: "every trajectory starts at the equilibrium".into(),
        candidate: StabilityClass::Us,
    })?;
    Ok(Prepared { offsets, profiles })
}

fn alpha_table(beta: &KlEnvelope) -> Vec<(f64, f64)> {
    beta.radii
        .iter()
        .zip(&beta.table)
        .map(|(r, row)| (*r, row.iter().cloned().fold(0.0, f64::max)))
        .collect()
}

fn envelope(prep: &Prepared, class: StabilityClass, k: f64, lambda: f64, residual: f64) -> Result<StabilityEnvelope> {
    let beta = KlEnvelope::from_profiles(&prep.profiles, &prep.offsets)?;
    let r_min = prep.profiles.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    Ok(StabilityEnvelope {
        class,
        k,
        lambda,
        residual,
        alpha: alpha_table(&beta),
        r_max: beta.r_max(),
        beta,
        r_min,
        trajectories: prep.profiles.len(),
    })
}

fn fit(prep: &Prepared) -> Result<(f64, f64, f64)> {
    let s_max = *prep.offsets.last().unwrap();
    if !(s_max > 0.0) {
        return Err(Error::InvalidArgument("trajectories have zero length".into()));
    }
    let decaying = prep
        .profiles
        .iter()
        .all(|(d0, p)| *p.last().unwrap() < d0 * (1.0 - 1e-6));
    if !decaying {
        return Err(Error::Classification {
            reason: format!("{}: some trajectory does not approach the equilibrium", anchors::EXPONENTIAL_ENVELOPE),
            candidate: StabilityClass::Us,
        });
    }
    // Pooled least squares of ln(d/d0) = b - lambda s.
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (d0, p) in &prep.profiles {
        for (s, d) in prep.offsets.iter().zip(p) {
            if *d > 0.0 {
                let y = (d / d0).ln();
                n += 1.0;
                sx += s;
                sy += y;
                sxx += s * s;
                sxy += s * y;
            }
        }
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let b = (sy - slope * sx) / n;
    let lambda = -slope;
    let mut ss = 0.0;
    let mut k = 1.0_f64;
    for (d0, p) in &prep.profiles {
        for (s, d) in prep.offsets.iter().zip(p) {
            if *d > 0.0 {
                let r = (d / d0).ln() - (b - lambda * s);
                ss += r * r;
            }
            k = k.max(d / (d0 * (-lambda * s).exp()));
        }
    }
    let residual = (ss / n).sqrt() / (lambda.abs() * s_max);
    Ok((k, lambda, residual))
}

/// Least-squares exponential envelope `d(t) <= K e^{-lambda (t - t0)} d0`.
///
/// `K` is then raised to the smallest value dominating every sample.
/// Trajectories starting at `x_star` are ignored.
pub fn fit_exponential_envelope(trajectories: &[Trajectory], x_star: &ManifoldPoint) -> Result<StabilityEnvelope> {
    let prep = prepare(trajectories, x_star)?;
    let (k, lambda, residual) = fit(&prep)?;
    if !(lambda > LES_LAMBDA_MIN) {
        return Err(Error::Classification {
            reason: format!("{}: fitted rate {lambda:.3e} is not positive", anchors::EXPONENTIAL_ENVELOPE),
            candidate: StabilityClass::Us,
        });
    }
    if residual > LES_RESIDUAL_MAX {
        return Err(Error::Classification {
            reason: format!(
                "{}: log-linear fit residual {residual:.3} exceeds {LES_RESIDUAL_MAX}",
                anchors::EXPONENTIAL_ENVELOPE
            ),
            candidate: StabilityClass::Uas,
        });
    }
    envelope(&prep, StabilityClass::Les, k, lambda, residual)
}

/// Strongest stability class supported by the sampled trajectories.
pub fn classify_stability(trajectories: &[Trajectory], x_star: &ManifoldPoint) -> Result<StabilityEnvelope> {
    match fit_exponential_envelope(trajectories, x_star) {
        Ok(env) => return Ok(env),
        Err(Error::Classification { .. }) => {}
        Err(e) => return Err(e),
    }
    let prep = prepare(trajectories, x_star)?;
    let (k, lambda, residual) = fit(&prep).unwrap_or((f64::NAN, 0.0, f64::NAN));
    let beta = KlEnvelope::from_profiles(&prep.profiles, &prep.offsets)?;
    let growth = prep
        .profiles
        .iter()
        .flat_map(|(d0, p)| p.iter().map(move |d| d / d0))
        .fold(0.0, f64::max);
    if growth > 100.0 {
        return Err(Error::Classification {
            reason: format!("trajectories grow by a factor {growth:.1}"),
            candidate: StabilityClass::Us,
        });
    }
    let row = beta.table.last().unwrap();
    let class = if *row.last().unwrap() <= DECAY_FRACTION * row[0] {
        StabilityClass::Uas
    } else {
        StabilityClass::Us
    };
    envelope(&prep, class, k, lambda, residual)
}

/// `classify_stability` reported as a global class, for samples spread over the whole manifold.
pub fn classify_stability_global(trajectories: &[Trajectory], x_star: &ManifoldPoint) -> Result<StabilityEnvelope> {
    let mut env = classify_stability(trajectories, x_star)?;
    env.class = env.class.globalized();
    Ok(env)
}

/// Largest `d(phi(t), x*) / (K e^{-lambda s} d0)` over the trajectories.
pub fn envelope_domination(env: &StabilityEnvelope, trajectories: &[Trajectory], x_star: &ManifoldPoint) -> Result<f64> {
    let mut worst = 0.0_f64;
    for tr in trajectories {
        let d0 = distance(tr.initial(), x_star)?;
        if d0 < DEGENERATE_PAIR_DIST {
            continue;
        }
        for (t, x) in &tr.samples {
            let bound = env.k * (-env.lambda * (t - tr.t0)).exp() * d0;
            worst = worst.max(distance(x, x_star)? / bound);
        }
    }
    Ok(worst)
}
