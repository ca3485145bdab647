use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use pbamr::adapt::{amr_run, bench_csv, preconditioner_bench, AmrReport, AmrRun};
use pbamr::mesh::{generate_born_mesh, generate_fitted_born_mesh, read_pbmesh, write_pbmesh, MeshHierarchy, SimplicialMesh};
use pbamr::problem::{parse_pqr, MolecularSystem};
use pbamr::vtk::write_vtk;

use crate::config::{ChargeSource, ConfigError, MeshSource, RunConfig};
use crate::Mode;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Failed(String),
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Failed(format!("i/o error: {e}"))
    }
}

fn input_error(what: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Config(ConfigError(format!("{}: {e}", what.display())))
}

fn load_mesh(cfg: &RunConfig) -> Result<SimplicialMesh, RunError> {
    match &cfg.mesh {
        MeshSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
            read_pbmesh(&text).map_err(|e| input_error(path, e))
        }
        &MeshSource::Born { half_width, radius, subdivisions, fitted } => {
            let mesh = if fitted {
                generate_fitted_born_mesh(half_width, radius, subdivisions)
            } else {
                generate_born_mesh(half_width, radius, subdivisions)
            };
            mesh.map_err(|e| RunError::Config(ConfigError(e.to_string())))
        }
    }
}

fn load_system(cfg: &RunConfig) -> Result<MolecularSystem, RunError> {
    match &cfg.charges {
        ChargeSource::Pqr(path) => {
            let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
            parse_pqr(&text).map_err(|e| input_error(path, e))
        }
        ChargeSource::BornIon { charge } => {
            let radius = match cfg.mesh {
                MeshSource::Born { radius, .. } => radius,
                MeshSource::File(_) => unreachable!("validated: mesh files come with a pqr file"),
            };
            MolecularSystem::born_ion(*charge, radius).map_err(|e| RunError::Config(ConfigError(e.to_string())))
        }
    }
}

pub fn run(mode: Mode, cfg: &RunConfig) -> Result<(), RunError> {
    fs::create_dir_all(&cfg.out)?;
    match mode {
        Mode::GenBorn => gen_born(cfg),
        Mode::Solve => solve(cfg),
        Mode::Study => study(cfg),
        Mode::Bench => bench(cfg),
    }
}

fn gen_born(cfg: &RunConfig) -> Result<(), RunError> {
    if let MeshSource::File(_) = cfg.mesh {
        return Err(RunError::Config(ConfigError("gen-born needs born_* keys, not a mesh file".into())));
    }
    let mesh = load_mesh(cfg)?;
    fs::write(cfg.out.join("born.pbmesh"), write_pbmesh(&mesh))?;
    Ok(())
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn export(path: &Path, run: &AmrRun) -> Result<(), RunError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_vtk(
        &mut out,
        run.hierarchy.finest(),
        &[("u_r", run.solution.values())],
        &[("eta", &run.indicator.values)],
    )?;
    Ok(())
}

fn adapt(cfg: &RunConfig, amr: &pbamr::adapt::AmrConfig) -> Result<AmrRun, (RunError, AmrReport)> {
    let mesh = load_mesh(cfg).map_err(|e| (e, AmrReport::default()))?;
    let system = load_system(cfg).map_err(|e| (e, AmrReport::default()))?;
    amr_run(MeshHierarchy::new(mesh), &system, amr).map_err(|f| (RunError::Failed(f.error.to_string()), f.report))
}

fn solve(cfg: &RunConfig) -> Result<(), RunError> {
    let amr = pbamr::adapt::AmrConfig { max_levels: 0, ..cfg.amr.clone() };
    let run = adapt(cfg, &amr).map_err(|(e, _)| e)?;
    let row = &run.report.rows[0];
    let (lo, hi) = run.solution.min_max();
    let mut summary = String::new();
    let _ = writeln!(summary, "nodes = {}", row.nodes);
    let _ = writeln!(summary, "dofs = {}", row.dofs);
    let _ = writeln!(summary, "S_kBT = {:.16e}", row.energy);
    let _ = writeln!(summary, "S_kcal_per_mol = {:.16e}", cfg.amr.params.to_kcal_per_mol(row.energy));
    let _ = writeln!(summary, "estimate = {:.16e}", row.estimate);
    let _ = writeln!(summary, "indicator = {}", run.indicator.kind);
    let _ = writeln!(summary, "newton_iters = {}", row.newton_iterations);
    let _ = writeln!(summary, "cg_iters = {}", row.cg_iterations);
    let _ = writeln!(summary, "u_r_min = {lo:.16e}");
    let _ = writeln!(summary, "u_r_max = {hi:.16e}");
    fs::write(cfg.out.join("summary.txt"), summary)?;
    export(&cfg.out.join("solution.vtk"), &run)
}

fn study(cfg: &RunConfig) -> Result<(), RunError> {
    let started = unix_seconds();
    let result = adapt(cfg, &cfg.amr);
    let report = match &result {
        Ok(run) => &run.report,
        Err((_, report)) => report,
    };
    fs::write(cfg.out.join("study.csv"), report.to_csv(cfg.timing))?;
    let mut log = format!("started {started:.3}\n");
    for r in &report.rows {
        let _ = writeln!(log, "level {} seconds {:.6}", r.level, r.seconds);
    }
    let _ = writeln!(log, "finished {:.3}", unix_seconds());
    fs::write(cfg.out.join("study.log"), log)?;
    let run = result.map_err(|(e, _)| e)?;
    export(&cfg.out.join("solution.vtk"), &run)
}

fn bench(cfg: &RunConfig) -> Result<(), RunError> {
    let run = adapt(cfg, &cfg.amr).map_err(|(e, _)| e)?;
    let system = load_system(cfg)?;
    let rows = preconditioner_bench(&run.hierarchy, &system, &cfg.amr.params, &cfg.bench_variants, &cfg.amr.solver)
        .map_err(|e| RunError::Failed(e.to_string()))?;
    fs::write(cfg.out.join("bench.csv"), bench_csv(&rows))?;
    Ok(())
}
