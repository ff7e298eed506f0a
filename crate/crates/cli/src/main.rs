//! `geolyap`: builds and checks Lyapunov certificates for built-in systems on
//! Riemannian manifolds.
//!
//! Exit codes: 0 on success, 2 when a certification or property check fails,
//! 3 on configuration errors or input-contract violations (nothing is written).

mod commands;
mod config;
mod output;
mod registry;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geolyap_core::manifold::ManifoldKind;
use geolyap_core::Error;

use crate::commands::Run;
use crate::config::{CertifyMode, ScenarioConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or precondition breach: exit 3.
    Config(String),
    /// The run could not be completed: exit 2.
    Failed(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn failed(msg: impl Into<String>) -> Self {
        CliError::Failed(msg.into())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Failed(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Failed(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::InvalidPoint { .. }
            | Error::InvalidTangent { .. }
            | Error::KindMismatch { .. }
            | Error::InvalidDelta { .. }
            | Error::InputContract { .. } => CliError::Config(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "geolyap", version, about = "Converse Lyapunov certificates on Riemannian manifolds")]
struct Cli {
    /// Worker threads for sample grids (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct ScenarioArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's `out`, else `out/<name>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Property suite of the geometry kernel.
    VerifyGeometry {
        #[arg(long)]
        manifold: ManifoldKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Estimate L, fit the envelope, construct V and verify the certificate.
    Certify {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Overrides the config's mode.
        #[arg(long, value_enum)]
        mode: Option<CertifyMode>,
    },
    /// Input-to-state check of the certified function under the configured disturbance.
    Iss {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Integrate and dump trajectories as CSV.
    Flow {
        #[command(flatten)]
        args: ScenarioArgs,
    },
}

fn load(args: &ScenarioArgs) -> Result<(ScenarioConfig, PathBuf), CliError> {
    let cfg = ScenarioConfig::load(&args.config)?.with_seed(args.seed);
    let out = args.out.clone().unwrap_or_else(|| commands::default_out(&cfg));
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::config("--workers must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::failed(e.to_string()))?;
    }
    let (result, out): (Run, Option<PathBuf>) = match cli.command {
        Command::VerifyGeometry { manifold, seed, n, out, inject_fault } => {
            (commands::verify_geometry(manifold, seed, n, inject_fault)?, out)
        }
        Command::Certify { args, mode } => {
            let (cfg, out) = load(&args)?;
            let mode = mode.unwrap_or(cfg.mode);
            (commands::certify(cfg, mode)?, Some(out))
        }
        Command::Iss { args } => {
            let (cfg, out) = load(&args)?;
            (commands::iss(cfg)?, Some(out))
        }
        Command::Flow { args } => {
            let (cfg, out) = load(&args)?;
            (commands::flow_dump(cfg)?, Some(out))
        }
    };
    if let Some(dir) = out {
        for p in result.outputs.write_all(&dir)? {
            log::info!("wrote {}", p.display());
        }
        log::debug!("files: {}", result.outputs.names().collect::<Vec<_>>().join(", "));
    }
    let _ = writeln!(std::io::stdout(), "{}", result.summary.trim_end());
    if let Some(f) = &result.failure {
        eprintln!("geolyap: {f}");
    }
    Ok(if result.pass { 0 } else { 2 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GEOLYAP_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("geolyap: {e}");
            ExitCode::from(e.code())
        }
    }
}
