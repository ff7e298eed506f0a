use std::path::PathBuf;

use geolyap_core::certifier::{
    anchors, classify_stability, classify_stability_global, fit_exponential_envelope, iss_certify, sample_trajectories,
    verify_converse_certificate, verify_ugas_certificate, CertificationReport, ConverseOutcome, StabilityEnvelope,
};
use geolyap_core::flow::{flow, lipschitz_estimate, LipschitzEstimate, Region, TimeVaryingField};
use geolyap_core::lyapunov::choose_delta_p;
use geolyap_core::manifold::sampling::{random_point_in_shell, seeded_rng};
use geolyap_core::manifold::suite::{run_geometry_suite, GeometryFault, GeometrySuiteReport, SuiteOptions};
use geolyap_core::manifold::{ManifoldKind, ManifoldPoint};
use geolyap_core::Error;
use log::info;
use serde_json::{json, Value};

use crate::config::{CertifyMode, DeltaPolicy, ScenarioConfig};
use crate::output::{csv_bytes, float, lyapunov_samples_csv, Outputs};
use crate::{registry, CliError};

/// What a command produced: files to write, a console summary and the verdict.
pub struct Run {
    pub outputs: Outputs,
    pub summary: String,
    pub pass: bool,
    pub failure: Option<String>,
}

struct Scenario {
    cfg: ScenarioConfig,
    x_star: ManifoldPoint,
    field: TimeVaryingField,
}

impl Scenario {
    fn new(cfg: ScenarioConfig) -> Result<Self, CliError> {
        let x_star = cfg.equilibrium()?;
        let field = registry::build(&cfg.system.name, &cfg.system.params, &x_star)?;
        Ok(Scenario { cfg, x_star, field })
    }

    fn header(&self, command: &str) -> Value {
        let entry = registry::lookup(&self.cfg.system.name).expect("validated");
        json!({
            "scenario": self.cfg.name,
            "command": command,
            "manifold": self.cfg.manifold,
            "equilibrium": self.x_star.coords(),
            "system": {
                "name": entry.name,
                "description": entry.description,
                "params": self.cfg.system.params,
                "closed_form_decay": entry.closed_form_decay,
            },
            "seed": self.cfg.seed,
        })
    }

    fn lipschitz(&self) -> Result<LipschitzEstimate, CliError> {
        let region = Region::new(self.x_star.clone(), self.cfg.grids.radius)?;
        let l = lipschitz_estimate(
            &self.field,
            &region,
            &self.cfg.lipschitz.t_samples,
            self.cfg.lipschitz.n_pairs,
            self.cfg.lipschitz_seed(),
        )?;
        info!("Lipschitz estimate {:.6} (transport {:.6}, covariant {:.6})", l.value(), l.l_transport, l.l_covariant);
        Ok(l)
    }

    fn envelope(&self, exponential: bool) -> Result<StabilityEnvelope, Error> {
        let trs = sample_trajectories(&self.field, &self.x_star, &self.cfg.trajectories)?;
        let mut env = match (exponential, self.cfg.global) {
            (true, _) => fit_exponential_envelope(&trs, &self.x_star)?,
            (false, false) => classify_stability(&trs, &self.x_star)?,
            (false, true) => classify_stability_global(&trs, &self.x_star)?,
        };
        if exponential && self.cfg.global {
            env.class = env.class.globalized();
        }
        info!("envelope: class {}, K {:.6}, lambda {:.6}, residual {:.3e}", env.class, env.k, env.lambda, env.residual);
        Ok(env)
    }
}

fn envelope_json(env: &StabilityEnvelope) -> Value {
    json!({
        "class": env.class,
        "K": env.k,
        "lambda": env.lambda,
        "residual": env.residual,
        "r_min": env.r_min,
        "r_max": env.r_max,
        "trajectories": env.trajectories,
    })
}

fn lipschitz_json(l: &LipschitzEstimate) -> Value {
    json!({
        "value": l.value(),
        "safe_value": l.safe_value(),
        "l_transport": l.l_transport,
        "l_covariant": l.l_covariant,
        "samples": l.samples,
        "skipped_pairs": l.skipped_pairs,
    })
}

fn text_report(header: &[String], report: &CertificationReport) -> String {
    let mut s = String::new();
    for h in header {
        s.push_str(h);
        s.push('\n');
    }
    s.push('\n');
    s.push_str(&report.to_table());
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// The fit stage failed: report it as a certification failure with the anchor
/// of the envelope definition.
fn fit_failure(mut head: Value, err: &Error, mode: CertifyMode) -> Result<Run, CliError> {
    let (reason, candidate) = match err {
        Error::Classification { reason, candidate } => (reason.clone(), Some(*candidate)),
        other => (other.to_string(), None),
    };
    let message = if reason.contains(anchors::EXPONENTIAL_ENVELOPE) {
        format!("envelope fit failed: {reason}")
    } else {
        format!("envelope fit failed [{}]: {reason}", anchors::EXPONENTIAL_ENVELOPE)
    };
    head["mode"] = json!(mode_name(mode));
    head["stage"] = json!("envelope-fit");
    head["failure"] = json!({ "anchor": anchors::EXPONENTIAL_ENVELOPE, "reason": reason, "candidate_class": candidate });
    head["pass"] = json!(false);
    let mut outputs = Outputs::default();
    outputs.add_json("report.json", &head)?;
    let text = format!("scenario: {}\nstage: envelope-fit\n{message}\nverdict: FAIL\n", head["scenario"].as_str().unwrap_or(""));
    outputs.add("report.txt", text.clone());
    Ok(Run { outputs, summary: text, pass: false, failure: Some(message) })
}

fn mode_name(mode: CertifyMode) -> &'static str {
    match mode {
        CertifyMode::Exp => "exp",
        CertifyMode::Massera => "massera",
    }
}

fn failing_anchors(report: &CertificationReport) -> Option<String> {
    let rows: Vec<String> = report.failing().map(|r| format!("{} [{}]", r.name, r.anchor)).collect();
    (!rows.is_empty()).then(|| format!("failing checks: {}", rows.join(", ")))
}

struct ExpPipeline {
    lip: LipschitzEstimate,
    env: StabilityEnvelope,
    delta: f64,
    outcome: ConverseOutcome,
}

fn exp_pipeline(sc: &Scenario) -> Result<Result<ExpPipeline, Error>, CliError> {
    let lip = sc.lipschitz()?;
    let env = match sc.envelope(true) {
        Ok(env) => env,
        Err(e @ Error::Classification { .. }) => return Ok(Err(e)),
        Err(e) => return Err(e.into()),
    };
    let delta = match sc.cfg.delta {
        DeltaPolicy::Explicit { value } => value,
        DeltaPolicy::Auto { target } => choose_delta_p(env.k, env.lambda, target, sc.cfg.p)?.delta,
    };
    info!("horizon delta = {delta:.6}");
    let outcome = verify_converse_certificate(&sc.field, &sc.x_star, &lip, &env, delta, sc.cfg.p, &sc.cfg.grids)?;
    Ok(Ok(ExpPipeline { lip, env, delta, outcome }))
}

pub fn certify(cfg: ScenarioConfig, mode: CertifyMode) -> Result<Run, CliError> {
    let sc = Scenario::new(cfg)?;
    let mut head = sc.header("certify");
    match mode {
        CertifyMode::Exp => {
            let p = match exp_pipeline(&sc)? {
                Ok(p) => p,
                Err(e) => return fit_failure(head, &e, mode),
            };
            let report = &p.outcome.report;
            head["mode"] = json!("exp");
            head["lipschitz"] = lipschitz_json(&p.lip);
            head["envelope"] = envelope_json(&p.env);
            head["delta"] = json!(p.delta);
            head["p"] = json!(sc.cfg.p);
            head["certificate"] = json!(p.outcome.certificate);
            head["report"] = json!(report);
            head["pass"] = json!(report.pass);
            let c = &p.outcome.certificate.constants;
            let lines = vec![
                format!("scenario: {}  manifold: {}  system: {}", sc.cfg.name, sc.cfg.manifold, sc.cfg.system.name),
                format!("envelope: class {}  K = {:.6}  lambda = {:.6}  L = {:.6}", p.env.class, p.env.k, p.env.lambda, p.lip.value()),
                format!("delta = {:.6}  p = {}", p.delta, sc.cfg.p),
                format!("c1 = {:.6}  c2 = {:.6}  c3 = {:.6}  c4 = {:.6}", c.c1, c.c2, c.c3, c.c4),
            ];
            let mut outputs = Outputs::default();
            outputs.add_json("report.json", &head)?;
            let table = text_report(&lines, report);
            outputs.add("report.txt", table.clone());
            outputs.add("samples.csv", lyapunov_samples_csv(&p.outcome.samples)?);
            Ok(Run { outputs, summary: table, pass: report.pass, failure: failing_anchors(report) })
        }
        CertifyMode::Massera => {
            let lip = sc.lipschitz()?;
            let env = match sc.envelope(false) {
                Ok(env) if env.class.is_asymptotic() => env,
                Ok(env) => {
                    let e = Error::Classification { reason: "trajectories do not decay".into(), candidate: env.class };
                    return fit_failure(head, &e, mode);
                }
                Err(e @ Error::Classification { .. }) => return fit_failure(head, &e, mode),
                Err(e) => return Err(e.into()),
            };
            let t_max = sc.cfg.massera.t_max;
            let out = verify_ugas_certificate(&sc.field, &sc.x_star, lip.value(), &env, t_max, &sc.cfg.grids)?;
            let g = out.v.massera().expect("Massera mode");
            head["mode"] = json!("massera");
            head["lipschitz"] = lipschitz_json(&lip);
            head["envelope"] = envelope_json(&env);
            head["massera"] = json!({ "t_max": t_max, "k1": g.k1(), "k2": g.k2(), "tail_bound": out.v.tail_bound() });
            head["report"] = json!(out.report);
            head["pass"] = json!(out.report.pass);
            let lines = vec![
                format!("scenario: {}  manifold: {}  system: {}", sc.cfg.name, sc.cfg.manifold, sc.cfg.system.name),
                format!("envelope: class {}  L = {:.6}  T = {}", env.class, lip.value(), t_max),
                format!("k1 = {:.6e}  k2 = {:.6e}  tail = {:.3e}", g.k1(), g.k2(), out.v.tail_bound()),
            ];
            let mut outputs = Outputs::default();
            outputs.add_json("report.json", &head)?;
            let table = text_report(&lines, &out.report);
            outputs.add("report.txt", table.clone());
            outputs.add("samples.csv", lyapunov_samples_csv(&out.samples)?);
            Ok(Run { outputs, summary: table, pass: out.report.pass, failure: failing_anchors(&out.report) })
        }
    }
}

pub fn iss(cfg: ScenarioConfig) -> Result<Run, CliError> {
    if cfg.p != 1.0 {
        return Err(CliError::config(format!("the iss command needs p = 1, got {}", cfg.p)));
    }
    let signal = cfg.disturbance()?;
    let sc = Scenario::new(cfg)?;
    if signal.dim() != sc.field.input_dim() {
        return Err(CliError::config(format!(
            "disturbance has dimension {}, system {} takes {} inputs on {}",
            signal.dim(),
            sc.cfg.system.name,
            sc.field.input_dim(),
            sc.cfg.manifold
        )));
    }
    let mut head = sc.header("iss");
    let p = match exp_pipeline(&sc)? {
        Ok(p) => p,
        Err(e) => return fit_failure(head, &e, CertifyMode::Exp),
    };
    let out = iss_certify(&sc.field, &sc.x_star, &p.outcome.certificate, &p.outcome.v, &signal, &sc.cfg.iss)?;
    let r = &out.report;
    let pass = p.outcome.report.pass && r.pass;
    head["lipschitz"] = lipschitz_json(&p.lip);
    head["envelope"] = envelope_json(&p.env);
    head["delta"] = json!(p.delta);
    head["certificate"] = json!(p.outcome.certificate);
    head["disturbance"] = json!(signal);
    head["converse_report"] = json!(p.outcome.report);
    head["iss"] = json!(r);
    head["pass"] = json!(pass);

    let lines = vec![
        format!("scenario: {}  manifold: {}  system: {}", sc.cfg.name, sc.cfg.manifold, sc.cfg.system.name),
        format!("|u|_inf = {}  L_u = {:.6}  c3 = {:.6}  c4 = {:.6}", r.input_bound, r.l_u, r.c3, r.c4),
        format!("ultimate bound on V: predicted {:.6e}  measured {:.6e}", r.predicted_v_bound, r.measured_v_limsup),
        format!("ultimate bound on d: predicted {:.6e}  measured {:.6e}", r.predicted_d_bound, r.measured_d_limsup),
    ];
    let mut combined = p.outcome.report.rows.clone();
    combined.extend(r.report.rows.iter().cloned());
    let table_report = CertificationReport::new(sc.cfg.name.clone(), combined);
    let table = text_report(&lines, &table_report);
    let header = ["trajectory", "t", "d", "V", "u_norm"].map(String::from);
    let series = csv_bytes(
        &header,
        out.series.iter().map(|s| vec![s.trajectory.to_string(), float(s.t), float(s.d), float(s.v), float(s.u_norm)]),
    )?;
    let mut outputs = Outputs::default();
    outputs.add_json("report.json", &head)?;
    outputs.add("report.txt", table.clone());
    outputs.add("samples.csv", series);
    Ok(Run { outputs, summary: table, pass, failure: failing_anchors(&table_report) })
}

pub fn flow_dump(cfg: ScenarioConfig) -> Result<Run, CliError> {
    let signal = cfg.disturbance.as_ref().map(|_| cfg.disturbance()).transpose()?;
    let sc = Scenario::new(cfg)?;
    let spec = &sc.cfg.flow;
    let field = match &signal {
        Some(s) => sc.field.forced(s.signal_fn())?,
        None => sc.field.clone(),
    };
    let x0 = match &spec.initial {
        Some(c) => ManifoldPoint::new(sc.cfg.manifold, c.clone()).map_err(|e| CliError::config(format!("flow.initial: {e}")))?,
        None => {
            let r = spec.initial_distance;
            if !(r >= 0.0 && r < sc.cfg.manifold.injectivity_radius()) {
                return Err(CliError::config(format!("flow.initial_distance {r} is outside the injectivity radius")));
            }
            random_point_in_shell(&sc.x_star, r, r, &mut seeded_rng(sc.cfg.seed))
        }
    };
    let dim = sc.cfg.manifold.ambient_dim();
    let mut header = vec!["t".to_string(), "s".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.push("d".into());
    let mut outputs = Outputs::default();
    let mut lines = vec![format!(
        "scenario: {}  manifold: {}  system: {}  trajectories: {}",
        sc.cfg.name,
        sc.cfg.manifold,
        sc.cfg.system.name,
        spec.t0_list.len()
    )];
    for (i, &t0) in spec.t0_list.iter().enumerate() {
        let tr = flow(&field, t0, &x0, t0 + spec.horizon, spec.step)?;
        let d = tr.distances_to(&sc.x_star)?;
        let rows = tr.samples.iter().zip(&d).map(|((t, x), d)| {
            let mut r = vec![float(*t), float(t - t0)];
            r.extend(x.coords().iter().map(|c| float(*c)));
            r.push(float(*d));
            r
        });
        outputs.add(format!("trajectory_{i}.csv"), csv_bytes(&header, rows)?);
        lines.push(format!("trajectory_{i}: t0 = {t0}  d0 = {:.6}  d_end = {:.6e}", d[0], d[d.len() - 1]));
    }
    Ok(Run { outputs, summary: lines.join("\n"), pass: true, failure: None })
}

fn suite_table(r: &GeometrySuiteReport) -> String {
    let mut s = format!("manifold: {}  seed: {}  n: {}\n", r.manifold, r.seed, r.n);
    s.push_str(&format!("{:<24} {:<22} {:>12} {:>12}  pass\n", "property", "anchor", "threshold", "worst"));
    for p in &r.properties {
        s.push_str(&format!(
            "{:<24} {:<22} {:>12.3e} {:>12.3e}  {}\n",
            p.name,
            p.anchor,
            p.threshold,
            p.worst,
            if p.pass { "yes" } else { "NO" }
        ));
    }
    s.push_str(&format!("verdict: {}\n", if r.pass { "PASS" } else { "FAIL" }));
    s
}

pub fn verify_geometry(manifold: ManifoldKind, seed: u64, n: usize, fault: bool) -> Result<Run, CliError> {
    if n == 0 {
        return Err(CliError::config("--n must be positive"));
    }
    let opts = SuiteOptions {
        n,
        seed,
        fault: if fault { GeometryFault::SkipRenormalization } else { GeometryFault::None },
        ..SuiteOptions::default()
    };
    let r = run_geometry_suite(manifold, &opts)?;
    let mut outputs = Outputs::default();
    outputs.add_json("report.json", &json!(r))?;
    let table = suite_table(&r);
    outputs.add("report.txt", table.clone());
    let failure = (!r.pass).then(|| {
        let bad: Vec<String> = r
            .properties
            .iter()
            .filter(|p| !p.pass)
            .map(|p| format!("{} [{}]: worst {:.3e}, sample {}", p.name, p.anchor, p.worst, p.failing_sample.clone().unwrap_or(Value::Null)))
            .collect();
        format!("geometry property failures: {}", bad.join("; "))
    });
    Ok(Run { outputs, summary: table, pass: r.pass, failure })
}

pub fn default_out(cfg: &ScenarioConfig) -> PathBuf {
    cfg.out.clone().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out").join(&cfg.name))
}

