use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anchors;
use super::report::{CertificationReport, CheckRow, Comparison};
use crate::error::{Error, Result};
use crate::flow::{flow_at, Region, SignalFn, TimeVaryingField};
use crate::lyapunov::{Certificate, LyapunovFunction};
use crate::manifold::sampling::{random_point_in_ball, random_point_in_shell, seeded_rng};
use crate::manifold::{distance, ManifoldPoint};
use crate::tolerances::{CERT_ABS_TOL, CERT_REL_TOL, ISS_REL_TOL};

/// Time profile of a disturbance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalShape {
    Constant { value: Vec<f64> },
    Sine {
        amplitude: Vec<f64>,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Step { before: Vec<f64>, after: Vec<f64>, at: f64 },
}

/// A disturbance `u(t)` with a declared bound `sup |u| <= bound`.
///
/// Sampling the signal beyond its bound raises an input-contract error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSignal {
    pub shape: SignalShape,
    pub bound: f64,
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl DisturbanceSignal {
    pub fn new(shape: SignalShape, bound: f64) -> Result<Self> {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("input bound must be non-negative, got {bound}")));
        }
        if let SignalShape::Step { before, after, .. } = &shape {
            if before.len() != after.len() {
                return Err(Error::InvalidArgument("step levels have different dimensions".into()));
            }
        }
        Ok(DisturbanceSignal { shape, bound })
    }

    pub fn constant(value: Vec<f64>) -> Self {
        let bound = norm(&value);
        DisturbanceSignal {
            shape: SignalShape::Constant { value },
            bound,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            SignalShape::Constant { value } => value.len(),
            SignalShape::Sine { amplitude, .. } => amplitude.len(),
            SignalShape::Step { before, .. } => before.len(),
        }
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        match &self.shape {
            SignalShape::Constant { value } => value.clone(),
            SignalShape::Sine { amplitude, omega, phase } => {
                let s = (omega * t + phase).sin();
                amplitude.iter().map(|a| a * s).collect()
            }
            SignalShape::Step { before, after, at } => {
                if t < *at {
                    before.clone()
                } else {
                    after.clone()
                }
            }
        }
    }

    /// `u(t)`, or an error if it exceeds the declared bound.
    pub fn checked(&self, t: f64) -> Result<Vec<f64>> {
        let u = self.value(t);
        let n = norm(&u);
        if n > self.bound * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::InputContract {
                time: t,
                norm: n,
                bound: self.bound,
            });
        }
        Ok(u)
    }

    /// The same profile and bound multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let sc = |v: &Vec<f64>| v.iter().map(|c| c * factor).collect::<Vec<f64>>();
        let shape = match &self.shape {
            SignalShape::Constant { value } => SignalShape::Constant { value: sc(value) },
            SignalShape::Sine { amplitude, omega, phase } => SignalShape::Sine {
                amplitude: sc(amplitude),
                omega: *omega,
                phase: *phase,
            },
            SignalShape::Step { before, after, at } => SignalShape::Step {
                before: sc(before),
                after: sc(after),
                at: *at,
            },
        };
        DisturbanceSignal {
            shape,
            bound: self.bound * factor.abs(),
        }
    }

    pub fn signal_fn(&self) -> Arc<SignalFn> {
        let s = self.clone();
        Arc::new(move |t| s.checked(t))
    }
}

fn require_input(field: &TimeVaryingField) -> Result<()> {
    if !field.has_input() {
        return Err(Error::InvalidArgument(format!("field '{}' has no input channel", field.name())));
    }
    Ok(())
}

/// `max |f(t,x,u) - f(t,x,0)| / |u|` over random states in `region` and
/// inputs with norm below `u_max`.
pub fn input_lipschitz_estimate(
    field: &TimeVaryingField,
    region: &Region,
    t_samples: &[f64],
    n_samples: usize,
    u_max: f64,
    seed: u64,
) -> Result<f64> {
    require_input(field)?;
    if t_samples.is_empty() {
        return Err(Error::InvalidArgument("no sample times".into()));
    }
    let mut rng = seeded_rng(seed);
    let dim = field.input_dim();
    let zero = vec![0.0; dim];
    let mut best = 0.0_f64;
    let mut used = 0;
    for i in 0..n_samples {
        let t = t_samples[i % t_samples.len()];
        let x = random_point_in_ball(&region.center, region.radius, &mut rng);
        let dir: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let scale = u_max * rng.random::<f64>() / norm(&dir).max(1e-300);
        let u: Vec<f64> = dir.iter().map(|c| c * scale).collect();
        let un = norm(&u);
        if !(un > 0.0) {
            continue;
        }
        used += 1;
        let diff = field.eval_input(t, &x, &u)?.sub(&field.eval_input(t, &x, &zero)?)?;
        best = best.max(diff.norm() / un);
    }
    if used == 0 {
        return Err(Error::Degenerate("every input sample was zero".into()));
    }
    Ok(best)
}

/// `c4 L_u |u| / c3`, the ultimate bound on `V` under inputs bounded by `|u|`.
pub fn predicted_ultimate_bound(c3: f64, c4: f64, l_u: f64, u_bound: f64) -> f64 {
    c4 * l_u * u_bound / c3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IssOptions {
    /// States for the pointwise check.
    pub n_points: usize,
    /// Samples for the input Lipschitz estimate.
    pub n_input_samples: usize,
    pub radius: f64,
    pub r_min: f64,
    pub t0_list: Vec<f64>,
    /// Length of each forced trajectory.
    pub horizon: f64,
    /// Final part of each trajectory over which the limsup is taken.
    pub window: f64,
    /// Spacing of the `(t, d, V, |u|)` series.
    pub sample_every: f64,
    pub step: f64,
    pub seed: u64,
}

impl Default for IssOptions {
    fn default() -> Self {
        IssOptions {
            n_points: 100,
            n_input_samples: 2000,
            radius: 1.0,
            r_min: 0.05,
            t0_list: vec![0.0, 1.0, std::f64::consts::E, 10.0],
            horizon: 20.0,
            window: 3.0,
            sample_every: 0.25,
            step: 1e-2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IssReport {
    pub c1: f64,
    pub c3: f64,
    pub c4: f64,
    #[serde(rename = "L_u")]
    pub l_u: f64,
    pub input_bound: f64,
    pub predicted_v_bound: f64,
    pub measured_v_limsup: f64,
    /// `predicted_v_bound / c1`, since `V >= c1 d`.
    pub predicted_d_bound: f64,
    pub measured_d_limsup: f64,
    pub report: CertificationReport,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IssSample {
    pub trajectory: usize,
    pub t: f64,
    pub d: f64,
    pub v: f64,
    pub u_norm: f64,
}

#[derive(Clone, Debug)]
pub struct IssOutcome {
    pub report: IssReport,
    pub series: Vec<IssSample>,
}

/// Input-to-state check of a certified exponential-mode function.
///
/// (a) compares the Lie derivative along the field forced by constant inputs of
/// norm `|u|_inf` with `-c3 V + c4 L_u |u|_inf`; (b) integrates the field
/// forced by `signal` from one start per `t0` and compares the largest `V` over
/// the final window with `c4 L_u |u|_inf / c3`.
pub fn iss_certify(
    field: &TimeVaryingField,
    x_star: &ManifoldPoint,
    certificate: &Certificate,
    v: &LyapunovFunction,
    signal: &DisturbanceSignal,
    opts: &IssOptions,
) -> Result<IssOutcome> {
    require_input(field)?;
    if (v.p() - 1.0).abs() > 0.0 {
        return Err(Error::InvalidArgument("the ISS check uses the p = 1 construction".into()));
    }
    if signal.dim() != field.input_dim() {
        return Err(Error::InvalidArgument(format!(
            "signal has dimension {}, field expects {}",
            signal.dim(),
            field.input_dim()
        )));
    }
    if !(opts.window > 0.0 && opts.window <= opts.horizon && opts.sample_every > 0.0) {
        return Err(Error::InvalidArgument("need 0 < window <= horizon and sample_every > 0".into()));
    }
    let c = &certificate.constants;
    let region = Region::new(x_star.clone(), opts.radius)?;
    let u_bound = signal.bound;
    let l_u = if u_bound > 0.0 {
        input_lipschitz_estimate(field, &region, &opts.t0_list, opts.n_input_samples, u_bound, opts.seed)?
    } else {
        0.0
    };

    // (a) pointwise decay under constant inputs on the bound.
    let mut rng = seeded_rng(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let dim = field.input_dim();
    let samples: Vec<(f64, ManifoldPoint, Vec<f64>)> = (0..opts.n_points)
        .map(|i| {
            let t = opts.t0_list[i % opts.t0_list.len()];
            let x = random_point_in_shell(x_star, opts.r_min, opts.radius, &mut rng);
            let dir: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let s = u_bound / norm(&dir).max(1e-300);
            (t, x, dir.iter().map(|c| c * s).collect())
        })
        .collect();
    let excess = samples
        .par_iter()
        .map(|(t, x, u)| {
            let u = u.clone();
            let forced = field.forced(Arc::new(move |_| Ok(u.clone())))?;
            let lie = v.lie_derivative_along(&forced, *t, x)?;
            Ok(lie + c.c3 * (1.0 - CERT_REL_TOL) * v.evaluate_v(*t, x)?)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let input_term = c.c4 * l_u * u_bound;
    let row_a = CheckRow::compare(
        "iss-pointwise-decay",
        anchors::ISS_POINTWISE_DECAY,
        Comparison::AtMost,
        input_term,
        excess,
        CERT_REL_TOL,
        CERT_ABS_TOL,
        samples.len(),
    );

    // (b) ultimate bound along forced trajectories.
    let forced = field.forced(signal.signal_fn())?;
    let starts: Vec<(f64, ManifoldPoint)> = opts
        .t0_list
        .iter()
        .map(|&t0| (t0, random_point_in_shell(x_star, opts.radius, opts.radius, &mut rng)))
        .collect();
    let n_samples = (opts.horizon / opts.sample_every).round() as usize;
    let series = starts
        .par_iter()
        .enumerate()
        .map(|(i, (t0, x0))| {
            let times: Vec<f64> = (1..=n_samples).map(|k| t0 + opts.sample_every * k as f64).collect();
            let pts = flow_at(&forced, *t0, x0, &times, opts.step)?;
            let mut rows = vec![IssSample {
                trajectory: i,
                t: *t0,
                d: distance(x0, x_star)?,
                v: v.evaluate_v(*t0, x0)?,
                u_norm: norm(&signal.value(*t0)),
            }];
            for (t, x) in times.iter().zip(&pts) {
                rows.push(IssSample {
                    trajectory: i,
                    t: *t,
                    d: distance(x, x_star)?,
                    v: v.evaluate_v(*t, x)?,
                    u_norm: norm(&signal.value(*t)),
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<IssSample>>();
    let t_window = |s: &IssSample| {
        let t0 = opts.t0_list[s.trajectory];
        s.t - t0 >= opts.horizon - opts.window - 1e-9
    };
    let measured_v = series.iter().filter(|s| t_window(s)).map(|s| s.v).fold(0.0, f64::max);
    let measured_d = series.iter().filter(|s| t_window(s)).map(|s| s.d).fold(0.0, f64::max);
    let predicted = predicted_ultimate_bound(c.c3, c.c4, l_u, u_bound);
    let row_b = CheckRow::compare(
        "iss-ultimate-bound",
        anchors::ISS_ULTIMATE_BOUND,
        Comparison::AtMost,
        predicted,
        measured_v,
        ISS_REL_TOL,
        CERT_ABS_TOL,
        starts.len(),
    );
    let report = CertificationReport::new(field.name(), vec![row_a, row_b]);
    let pass = report.pass;
    Ok(IssOutcome {
        report: IssReport {
            c1: c.c1,
            c3: c.c3,
            c4: c.c4,
            l_u,
            input_bound: u_bound,
            predicted_v_bound: predicted,
            measured_v_limsup: measured_v,
            predicted_d_bound: predicted / c.c1,
            measured_d_limsup: measured_d,
            report,
            pass,
        },
        series,
    })
}
