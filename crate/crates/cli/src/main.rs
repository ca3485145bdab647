//! `pbsolve <mode> --config <file>`: adaptive RPBE solves, refinement
//! studies, preconditioner benchmarks and Born-ion mesh generation.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::{ConfigError, MeshSource, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Solve,
    Study,
    Bench,
    GenBorn,
}

#[derive(Debug, Parser)]
#[command(name = "pbsolve", version, about = "Adaptive finite element solver for the regularized Poisson-Boltzmann equation")]
struct Cli {
    mode: Mode,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    indicator: Option<String>,
    #[arg(long)]
    marking: Option<String>,
    #[arg(long)]
    preconditioner: Option<String>,
    #[arg(long)]
    max_levels: Option<usize>,
    #[arg(long)]
    max_dof: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// gen-born: map the grid onto the sphere instead of a voxel staircase.
    #[arg(long)]
    fitted: bool,
}

fn parse_override<T: std::str::FromStr>(flag: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| ConfigError(format!("--{flag}: {e}")))
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", cli.config.display())))?;
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    let mut cfg = RunConfig::parse(&text, &base)?;
    if let Some(g) = cli.gamma {
        cfg.amr.marking.gamma = g;
    }
    if let Some(v) = &cli.indicator {
        cfg.amr.marking.indicator = parse_override("indicator", v)?;
    }
    if let Some(v) = &cli.marking {
        cfg.amr.marking.strategy = parse_override("marking", v)?;
    }
    if let Some(v) = &cli.preconditioner {
        cfg.amr.solver.preconditioner.variant = parse_override("preconditioner", v)?;
    }
    if let Some(v) = cli.max_levels {
        cfg.amr.max_levels = v;
    }
    if let Some(v) = cli.max_dof {
        cfg.amr.max_dof = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if cli.fitted {
        match &mut cfg.mesh {
            MeshSource::Born { fitted, .. } => *fitted = true,
            MeshSource::File(_) => return Err(ConfigError("--fitted needs a generated Born mesh".into())),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pbsolve: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    match run::run(cli.mode, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(run::RunError::Config(e)) => {
            eprintln!("pbsolve: configuration error: {e}");
            ExitCode::from(2)
        }
        Err(run::RunError::Failed(e)) => {
            eprintln!("pbsolve: {e}");
            ExitCode::from(1)
        }
    }
}
