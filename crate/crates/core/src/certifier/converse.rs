use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anchors;
use super::envelope::StabilityEnvelope;
use super::report::{CertificationReport, CheckRow, Comparison};
use crate::error::{Error, Result};
use crate::flow::{contraction_envelope_check, pushforward, LipschitzEstimate, TimeVaryingField};
use crate::lyapunov::{construct_exp_v, construct_ugas_v, theoretical_bounds, Certificate, LyapunovFunction, MasseraFunction};
use crate::manifold::sampling::{random_point_in_ball, random_point_in_shell, random_unit_tangent, seeded_rng};
use crate::manifold::{distance, ManifoldPoint, TangentVector};
use crate::tolerances::{CERT_ABS_TOL, CERT_REL_TOL, MASSERA_TAIL_MAX, PUSHFORWARD_REL_TOL, TELESCOPING_TOL};

/// Sample sizes and regions for the certification checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyGrids {
    /// States for the sandwich, decay and telescoping checks.
    pub n_points: usize,
    /// Unit directions for the differential bound.
    pub n_directions: usize,
    /// Trajectory pairs for the contraction envelope.
    pub n_pairs: usize,
    pub n_pushforward: usize,
    /// States for the Massera-mode checks.
    pub n_ugas: usize,
    pub radius: f64,
    /// Smallest distance to the equilibrium at which states are sampled.
    pub r_min: f64,
    /// Start times; uniformity in the initial time is checked over this list.
    pub t0_list: Vec<f64>,
    pub tau_max: f64,
    pub tau_points: usize,
    /// Integration step for the envelope and pushforward checks.
    pub envelope_step: f64,
    pub seed: u64,
}

impl Default for CertifyGrids {
    fn default() -> Self {
        CertifyGrids {
            n_points: 200,
            n_directions: 100,
            n_pairs: 100,
            n_pushforward: 100,
            n_ugas: 50,
            radius: 1.0,
            r_min: 0.05,
            t0_list: vec![0.0, 1.0, std::f64::consts::E, 10.0],
            tau_max: 3.0,
            tau_points: 31,
            envelope_step: 1e-2,
            seed: 0,
        }
    }
}

impl CertifyGrids {
    fn validate(&self, x_star: &ManifoldPoint) -> Result<()> {
        let inj = x_star.kind().injectivity_radius();
        if !(self.radius > 0.0 && self.radius < inj) {
            return Err(Error::InvalidArgument(format!(
                "grid radius {} must lie in (0, {inj})",
                self.radius
            )));
        }
        if !(self.r_min >= 0.0 && self.r_min < self.radius) {
            return Err(Error::InvalidArgument(format!("r_min {} must lie in [0, radius)", self.r_min)));
        }
        if self.t0_list.is_empty() || self.t0_list.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("t0_list must be a non-empty list of times".into()));
        }
        if self.tau_points < 2 || !(self.tau_max > 0.0) || !(self.envelope_step > 0.0) {
            return Err(Error::InvalidArgument("envelope grid needs tau_max > 0 and at least 2 points".into()));
        }
        Ok(())
    }

    fn t0(&self, i: usize) -> f64 {
        self.t0_list[i % self.t0_list.len()]
    }
}

/// One sampled state with the Lyapunov quantities, for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample {
    pub t: f64,
    pub d: f64,
    pub v: f64,
    pub lie: f64,
}

#[derive(Clone, Debug)]
pub struct ConverseOutcome {
    pub report: CertificationReport,
    pub certificate: Certificate,
    pub v: LyapunovFunction,
    pub samples: Vec<LyapunovSample>,
}

struct SampledStates {
    states: Vec<(f64, ManifoldPoint)>,
    pairs: Vec<(f64, ManifoldPoint, ManifoldPoint)>,
    directions: Vec<(f64, ManifoldPoint, TangentVector)>,
    pushes: Vec<(f64, ManifoldPoint, TangentVector, f64)>,
}

fn sample_states(x_star: &ManifoldPoint, g: &CertifyGrids) -> SampledStates {
    // Drawn sequentially from one stream so results do not depend on scheduling.
    let mut rng = seeded_rng(g.seed);
    let states = (0..g.n_points)
        .map(|i| (g.t0(i), random_point_in_shell(x_star, g.r_min, g.radius, &mut rng)))
        .collect();
    let pairs = (0..g.n_pairs)
        .map(|i| {
            let a = random_point_in_ball(x_star, g.radius, &mut rng);
            let b = random_point_in_ball(x_star, g.radius, &mut rng);
            (g.t0(i), a, b)
        })
        .collect();
    let directions = (0..g.n_directions)
        .map(|i| {
            let x = random_point_in_shell(x_star, g.r_min.max(1e-3), g.radius, &mut rng);
            let v = random_unit_tangent(&x, &mut rng);
            (g.t0(i), x, v)
        })
        .collect();
    let pushes = (0..g.n_pushforward)
        .map(|i| {
            let x = random_point_in_ball(x_star, g.radius, &mut rng);
            let v = random_unit_tangent(&x, &mut rng);
            let s = g.tau_max * (0.05 + 0.95 * rand::Rng::random::<f64>(&mut rng));
            (g.t0(i), x, v, s)
        })
        .collect();
    SampledStates {
        states,
        pairs,
        directions,
        pushes,
    }
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::INFINITY, f64::min)
}

/// Contraction-envelope row: worst growth exponent `|ln(d(tau)/d0)| / s` against `L`.
fn contraction_row(
    field: &TimeVaryingField,
    l_safe: f64,
    pairs: &[(f64, ManifoldPoint, ManifoldPoint)],
    g: &CertifyGrids,
) -> Result<CheckRow> {
    let reports = pairs
        .par_iter()
        .map(|(t, a, b)| {
            let grid: Vec<f64> = (1..g.tau_points)
                .map(|k| t + g.tau_max * k as f64 / (g.tau_points - 1) as f64)
                .collect();
            let d0 = distance(a, b)?;
            let rep = contraction_envelope_check(field, l_safe, a, b, *t, &grid, g.envelope_step)?;
            Ok((d0, *t, rep))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut exponent = 0.0_f64;
    let mut margin = f64::INFINITY;
    let mut pass = true;
    let mut flagged = 0;
    for (d0, t, rep) in &reports {
        pass &= rep.pass;
        flagged += rep.cut_locus_times.len();
        if rep.samples.is_empty() {
            continue;
        }
        margin = margin.min(rep.worst_lower_margin.min(rep.worst_upper_margin));
        if *d0 > 1e-10 {
            for s in &rep.samples {
                if s.distance > 0.0 {
                    exponent = exponent.max((s.distance / d0).ln().abs() / (s.tau - t));
                }
            }
        }
    }
    if flagged > 0 {
        log::warn!("contraction envelope: {flagged} samples skipped near the cut locus");
    }
    Ok(CheckRow::with_verdict(
        "contraction-envelope",
        anchors::CONTRACTION_ENVELOPE,
        l_safe,
        exponent,
        margin,
        pass,
        reports.len(),
    ))
}

fn pushforward_row(
    field: &TimeVaryingField,
    l_safe: f64,
    pushes: &[(f64, ManifoldPoint, TangentVector, f64)],
    step: f64,
) -> Result<CheckRow> {
    let ratios = pushes
        .par_iter()
        .map(|(t, x, v, s)| {
            let p = pushforward(field, *t, x, v, t + s, step)?;
            Ok(p.norm() / ((l_safe * s).exp() * v.norm()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CheckRow::compare(
        "pushforward-growth",
        anchors::DIFFERENTIAL_BOUND,
        Comparison::AtMost,
        1.0,
        max_of(ratios.into_iter()),
        PUSHFORWARD_REL_TOL,
        0.0,
        pushes.len(),
    ))
}

/// Builds the exponential-mode Lyapunov function and verifies every inequality
/// of the converse construction on sampled states, pairs and directions.
///
/// `K' <= 0` is rejected before any trajectory is integrated.
pub fn verify_converse_certificate(
    field: &TimeVaryingField,
    x_star: &ManifoldPoint,
    lipschitz: &LipschitzEstimate,
    envelope: &StabilityEnvelope,
    delta: f64,
    p: f64,
    grids: &CertifyGrids,
) -> Result<ConverseOutcome> {
    let l = lipschitz.value();
    let bounds = theoretical_bounds(l, envelope.k, envelope.lambda, delta, p)?;
    grids.validate(x_star)?;
    let v = construct_exp_v(field, x_star, delta, p)?;
    let l_safe = lipschitz.safe_value();
    let sampled = sample_states(x_star, grids);

    let values = sampled
        .states
        .par_iter()
        .map(|(t, x)| {
            let d = distance(x, x_star)?;
            let val = v.evaluate_v(*t, x)?;
            let lie = v.lie_derivative(*t, x)?;
            let tele = v.telescoping_value(*t, x)?;
            Ok((LyapunovSample { t: *t, d, v: val, lie }, tele))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = values.len();
    let dp = |s: &LyapunovSample| s.d.powf(p);
    let lower = min_of(values.iter().map(|(s, _)| s.v / dp(s)));
    let upper = max_of(values.iter().map(|(s, _)| s.v / dp(s)));
    let decay = min_of(values.iter().map(|(s, _)| (-s.lie + CERT_ABS_TOL) / s.v));
    let tele = max_of(values.iter().map(|(s, t)| (s.lie - t).abs()));

    let diffs = sampled
        .directions
        .par_iter()
        .map(|(t, x, dir)| {
            let d = distance(x, x_star)?;
            Ok(v.directional_derivative(*t, x, dir)?.abs() / (dir.norm() * d.powf(p - 1.0)))
        })
        .collect::<Result<Vec<f64>>>()?;

    let rows = vec![
        contraction_row(field, l_safe, &sampled.pairs, grids)?,
        CheckRow::compare("sandwich-lower", anchors::SANDWICH_BOUND, Comparison::AtLeast, bounds.c1, lower, CERT_REL_TOL, 0.0, n),
        CheckRow::compare("sandwich-upper", anchors::SANDWICH_BOUND, Comparison::AtMost, bounds.c2, upper, CERT_REL_TOL, 0.0, n),
        CheckRow::compare("lie-derivative-decay", anchors::LIE_DERIVATIVE_DECAY, Comparison::AtLeast, bounds.c3, decay, CERT_REL_TOL, 0.0, n),
        CheckRow::compare("telescoping-identity", anchors::TELESCOPING_IDENTITY, Comparison::AtMost, 0.0, tele, 0.0, TELESCOPING_TOL, n),
        CheckRow::compare(
            "differential-bound",
            anchors::DIFFERENTIAL_BOUND,
            Comparison::AtMost,
            bounds.c4,
            max_of(diffs.iter().cloned()),
            CERT_REL_TOL,
            0.0,
            diffs.len(),
        ),
        pushforward_row(field, l_safe, &sampled.pushes, grids.envelope_step)?,
    ];
    let certificate = Certificate::new(&v, &bounds, l, envelope.k, envelope.lambda);
    Ok(ConverseOutcome {
        report: CertificationReport::new(field.name(), rows),
        certificate,
        samples: values.into_iter().map(|(s, _)| s).collect(),
        v,
    })
}

#[derive(Clone, Debug)]
pub struct UgasOutcome {
    pub report: CertificationReport,
    pub v: LyapunovFunction,
    pub samples: Vec<LyapunovSample>,
}

fn simpson(f: impl Fn(f64) -> f64, length: f64, n: usize) -> f64 {
    let h = length / (n - 1) as f64;
    let mut s = f(0.0) + f(length);
    for i in 1..n - 1 {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(h * i as f64);
    }
    s * h / 3.0
}

/// `int_0^T G(r e^{-L s}) ds`: lower comparison function of the Massera construction.
pub fn ugas_alpha1(g: &MasseraFunction, l: f64, t_max: f64, r: f64) -> f64 {
    simpson(|s| g.eval(r * (-l * s).exp()), t_max, 4097)
}

/// Integral of `w(beta(r, s))` over `[0, T]` using the envelope's step profile.
fn envelope_integral(env: &StabilityEnvelope, r: f64, t_max: f64, w: impl Fn(f64, f64) -> f64) -> Option<f64> {
    let offsets = &env.beta.offsets;
    let mut sum = 0.0;
    for j in 0..offsets.len() {
        let a = offsets[j];
        if a >= t_max {
            break;
        }
        let b = offsets.get(j + 1).copied().unwrap_or(t_max).min(t_max);
        let beta = env.beta.eval(r, a)?;
        // w is nondecreasing in s on [a, b] only through e^{Ls}; use the right end.
        sum += (b - a) * w(beta, b);
    }
    if let Some(&last) = offsets.last() {
        if t_max > last {
            let beta = env.beta.eval(r, last)?;
            sum += (t_max - last) * w(beta, t_max);
        }
    }
    Some(sum)
}

/// Builds the Massera-mode Lyapunov function on the KL envelope and verifies
/// the comparison function, the sandwich, decay and differential bounds.
pub fn verify_ugas_certificate(
    field: &TimeVaryingField,
    x_star: &ManifoldPoint,
    l: f64,
    envelope: &StabilityEnvelope,
    t_max: f64,
    grids: &CertifyGrids,
) -> Result<UgasOutcome> {
    grids.validate(x_star)?;
    let v = construct_ugas_v(field, x_star, &envelope.beta, t_max, l)?;
    let g = v.massera().expect("Massera mode");
    let tail = v.tail_bound();

    let knots: Vec<(f64, f64, f64)> = g.knots().collect();
    let monotone = knots.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1 && w[1].2 > w[0].2);
    let comparison_ok = g.eval(0.0) == 0.0 && monotone && g.k1().is_finite() && g.k2().is_finite();
    let comparison = CheckRow::with_verdict(
        "massera-comparison",
        anchors::MASSERA_COMPARISON,
        MASSERA_TAIL_MAX,
        tail,
        MASSERA_TAIL_MAX - tail,
        comparison_ok && tail < MASSERA_TAIL_MAX,
        knots.len(),
    );

    let r_hi = grids.radius.min(envelope.beta.r_max());
    let r_lo = grids.r_min.max(1e-3).min(0.5 * r_hi);
    let mut rng = seeded_rng(grids.seed);
    let states: Vec<(f64, ManifoldPoint)> = (0..grids.n_ugas)
        .map(|i| (grids.t0(i), random_point_in_shell(x_star, r_lo, r_hi, &mut rng)))
        .collect();
    let n_dir = grids.n_ugas.min(grids.n_directions).max(1);
    let directions: Vec<(f64, ManifoldPoint, TangentVector)> = (0..n_dir)
        .map(|i| {
            let x = random_point_in_shell(x_star, r_lo, r_hi, &mut rng);
            let u = random_unit_tangent(&x, &mut rng);
            (grids.t0(i), x, u)
        })
        .collect();

    let missing = || Error::InvalidArgument("sample radius exceeds the KL envelope".into());
    let values = states
        .par_iter()
        .map(|(t, x)| {
            let d = distance(x, x_star)?;
            let val = v.evaluate_v(*t, x)?;
            let lie = v.lie_derivative(*t, x)?;
            let a1 = ugas_alpha1(g, l, t_max, d);
            let a2 = envelope_integral(envelope, d, t_max, |b, _| g.eval(b)).ok_or_else(missing)? + tail;
            Ok((LyapunovSample { t: *t, d, v: val, lie }, a1, a2, g.eval(d)))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = values.len();
    let lower = min_of(values.iter().map(|(s, a1, _, _)| s.v / a1));
    let upper = max_of(values.iter().map(|(s, _, a2, _)| s.v / a2));
    let all_negative = values.iter().all(|(s, _, _, _)| s.lie < 0.0 && s.v > 0.0);
    let decay_ratio = max_of(values.iter().map(|(s, _, _, gd)| s.lie / gd));

    let diffs = directions
        .par_iter()
        .map(|(t, x, u)| {
            let d = distance(x, x_star)?;
            let bound = envelope_integral(envelope, d, t_max, |b, s| g.derivative(b) * (l * s).exp()).ok_or_else(missing)?;
            Ok(v.directional_derivative(*t, x, u)?.abs() / bound)
        })
        .collect::<Result<Vec<f64>>>()?;

    let rows = vec![
        comparison,
        CheckRow::compare("ugas-sandwich-lower", anchors::UGAS_SANDWICH, Comparison::AtLeast, 1.0, lower, CERT_REL_TOL, 0.0, n),
        CheckRow::compare("ugas-sandwich-upper", anchors::UGAS_SANDWICH, Comparison::AtMost, 1.0, upper, CERT_REL_TOL, 0.0, n),
        CheckRow::with_verdict("ugas-decay", anchors::UGAS_DECAY, -1.0, decay_ratio, -decay_ratio, all_negative, n),
        CheckRow::compare(
            "ugas-differential-bound",
            anchors::UGAS_DIFFERENTIAL_BOUND,
            Comparison::AtMost,
            1.0,
            max_of(diffs.iter().cloned()),
            CERT_REL_TOL,
            0.0,
            diffs.len(),
        ),
    ];
    Ok(UgasOutcome {
        report: CertificationReport::new(field.name(), rows),
        samples: values.into_iter().map(|(s, _, _, _)| s).collect(),
        v,
    })
}
