//! Marking strategies, the SOLVE/ESTIMATE/MARK/REFINE driver and the
//! per-level preconditioner benchmark.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::estimator::{
    indicator_energy, indicator_goal_linear, indicator_goal_quadratic, mollified_goal_vector, solvation_energy,
    solve_dual, FluxAverage, GoalFunctional, IndicatorField, IndicatorKind,
};
use crate::fespace::{p1_to_p2, prolongate_field, Degree, FeSpace, FieldVector};
use crate::mesh::{smoothing_set, MeshHierarchy, Region};
use crate::mlsolve::{pcg, Identity, LevelStack, MultilevelPreconditioner, MultilevelSolver, PreconditionerVariant, SolverConfig};
use crate::problem::{newton_solve, MolecularSystem, NewtonConfig, Nonlinearity, PbeParameters, RpbeOperator};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MarkingStrategy {
    /// One threshold from the maximum over the whole mesh.
    #[default]
    Global,
    /// Separate thresholds for the solute and solvent elements.
    Split,
}

impl MarkingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            MarkingStrategy::Global => "global",
            MarkingStrategy::Split => "split",
        }
    }
}

impl fmt::Display for MarkingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MarkingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "global" => Ok(MarkingStrategy::Global),
            "split" => Ok(MarkingStrategy::Split),
            _ => Err(Error::Parameter(format!("unknown marking strategy '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkingConfig {
    pub strategy: MarkingStrategy,
    pub gamma: f64,
    pub indicator: IndicatorKind,
}

impl Default for MarkingConfig {
    fn default() -> Self {
        Self { strategy: MarkingStrategy::Global, gamma: 0.5, indicator: IndicatorKind::Energy }
    }
}

impl MarkingConfig {
    pub fn new(strategy: MarkingStrategy, gamma: f64, indicator: IndicatorKind) -> Result<Self> {
        let c = Self { strategy, gamma, indicator };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("gamma = {gamma} must lie strictly between 0 and 1")))
    }
}

fn threshold_mark(eta: &[f64], ids: impl Iterator<Item = usize> + Clone, gamma: f64) -> Vec<usize> {
    let max = ids.clone().map(|k| eta[k]).fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    ids.filter(|&k| eta[k] > gamma * max).collect()
}

/// Elements with `|eta_K| > gamma max_T |eta_T|`, in ascending order.
pub fn mark_global(eta: &IndicatorField, gamma: f64) -> Result<Vec<usize>> {
    check_gamma(gamma)?;
    if eta.is_empty() {
        return Err(Error::Parameter("empty indicator field".into()));
    }
    let m = eta.magnitudes();
    let marked = threshold_mark(&m, 0..m.len(), gamma);
    if marked.is_empty() {
        return Err(Error::ZeroEstimator);
    }
    Ok(marked)
}

/// Union of the global marking applied separately to the solute and the
/// solvent elements. A region whose indicators all vanish contributes
/// nothing.
pub fn mark_split(eta: &IndicatorField, gamma: f64, regions: &[Region]) -> Result<Vec<usize>> {
    check_gamma(gamma)?;
    if eta.len() != regions.len() {
        return Err(Error::Dimension(format!("{} indicators for {} elements", eta.len(), regions.len())));
    }
    let m = eta.magnitudes();
    let in_region = |r: Region| (0..m.len()).filter(move |&k| regions[k] == r);
    if in_region(Region::Solute).next().is_none() || in_region(Region::Solvent).next().is_none() {
        return Err(Error::Parameter("split marking needs solute and solvent elements".into()));
    }
    let mut marked = threshold_mark(&m, in_region(Region::Solute), gamma);
    marked.extend(threshold_mark(&m, in_region(Region::Solvent), gamma));
    if marked.is_empty() {
        return Err(Error::ZeroEstimator);
    }
    marked.sort_unstable();
    Ok(marked)
}

/// Marks with the configured strategy.
pub fn mark(eta: &IndicatorField, config: &MarkingConfig, regions: &[Region]) -> Result<Vec<usize>> {
    match config.strategy {
        MarkingStrategy::Global => mark_global(eta, config.gamma),
        MarkingStrategy::Split => mark_split(eta, config.gamma, regions),
    }
}

#[derive(Clone, Debug)]
pub struct AmrConfig {
    pub params: PbeParameters,
    pub mode: Nonlinearity,
    pub marking: MarkingConfig,
    pub solver: SolverConfig,
    pub newton: NewtonConfig,
    pub flux: FluxAverage,
    /// Mollifier radius for the goal indicators; `None` picks the default
    /// on the coarse mesh.
    pub sigma: Option<f64>,
    /// Refinement steps after the initial solve.
    pub max_levels: usize,
    /// Levels whose node count would exceed this are not solved.
    pub max_dof: usize,
    /// Stop once the global estimate drops below this.
    pub tol: Option<f64>,
}

impl Default for AmrConfig {
    fn default() -> Self {
        Self {
            params: PbeParameters::default(),
            mode: Nonlinearity::Linear,
            marking: MarkingConfig::default(),
            solver: SolverConfig::default(),
            newton: NewtonConfig::default(),
            flux: FluxAverage::default(),
            sigma: None,
            max_levels: 8,
            max_dof: 200_000,
            tol: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelRow {
    pub level: usize,
    /// Mesh nodes `N_j`.
    pub nodes: usize,
    /// Free unknowns.
    pub dofs: usize,
    pub marked_solute: usize,
    pub marked_solvent: usize,
    /// Solvation energy in `k_B T`.
    pub energy: f64,
    pub estimate: f64,
    pub cg_iterations: usize,
    pub newton_iterations: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AmrReport {
    pub rows: Vec<LevelRow>,
}

pub const STUDY_HEADER: &str = "level,N,dof,marked_m,marked_s,S_kBT,estimate,cg_iters,newton_iters,seconds";

impl AmrReport {
    /// CSV with 17 significant digits. Without `timing` the seconds column
    /// is written as zero so that reruns are byte-identical.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from(STUDY_HEADER);
        out.push('\n');
        for r in &self.rows {
            let secs = if timing { r.seconds } else { 0.0 };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.16e},{:.16e},{},{},{:.16e}",
                r.level,
                r.nodes,
                r.dofs,
                r.marked_solute,
                r.marked_solvent,
                r.energy,
                r.estimate,
                r.cg_iterations,
                r.newton_iterations,
                secs
            );
        }
        out
    }
}

/// Result of an adaptive run: the report, the refined hierarchy, and the
/// solution and indicators of the last solved level.
#[derive(Clone, Debug)]
pub struct AmrRun {
    pub report: AmrReport,
    pub hierarchy: MeshHierarchy,
    pub solution: FieldVector,
    pub indicator: IndicatorField,
}

/// An error raised during an adaptive run, with the rows completed so far.
#[derive(Debug, thiserror::Error)]
#[error("adaptive run failed after {} levels: {error}", report.rows.len())]
pub struct AmrFailure {
    #[source]
    pub error: Error,
    pub report: AmrReport,
}

/// Solves the RPBE on the finest level of `hierarchy`, warm-started from
/// `initial`. Without a warm start the nonlinear solve starts from the
/// linearized solution. Returns the solution with the Newton iteration
/// count of the final solve and the total CG iteration count.
pub fn solve_level(
    hierarchy: &MeshHierarchy,
    system: &MolecularSystem,
    config: &AmrConfig,
    initial: Option<&[f64]>,
) -> Result<(FieldVector, usize, usize)> {
    let space = Arc::new(FeSpace::new(hierarchy.mesh_arc(hierarchy.finest_level()), Degree::P1)?);
    let mut solver = MultilevelSolver::new(hierarchy, space.boundary_mask().to_vec(), config.solver);
    let mut cg = 0;
    let mut start = initial.map(<[f64]>::to_vec);
    if start.is_none() && config.mode == Nonlinearity::Sinh {
        let lin = RpbeOperator::new(space.clone(), system, &config.params, Nonlinearity::Linear)?;
        let rep = newton_solve(&lin, None, &mut solver, &config.newton)?;
        cg += rep.linear_iterations;
        start = Some(rep.solution.into_values());
    }
    let op = RpbeOperator::new(space, system, &config.params, config.mode)?;
    let rep = newton_solve(&op, start.as_deref(), &mut solver, &config.newton)?;
    Ok((rep.solution, rep.iterations, cg + rep.linear_iterations))
}

/// Indicator field of the configured kind for the finest-level solution
/// `u`.
pub fn estimate(
    hierarchy: &MeshHierarchy,
    u: &FieldVector,
    goal: &GoalFunctional,
    config: &AmrConfig,
) -> Result<IndicatorField> {
    let system = goal.system();
    let params = &config.params;
    let tol = config.solver.tol;
    match config.marking.indicator {
        IndicatorKind::Energy => indicator_energy(u, system, params, config.mode),
        IndicatorKind::GoalLinear => {
            let space = u.space().clone();
            let s = mollified_goal_vector(&space, goal)?;
            let mut solver = MultilevelSolver::new(hierarchy, space.boundary_mask().to_vec(), config.solver);
            let w1 = solve_dual(space, params, &s, &mut solver, tol)?;
            indicator_goal_linear(u, &w1, goal, params, config.mode, config.flux)
        }
        IndicatorKind::GoalQuadratic => {
            let p2 = Arc::new(FeSpace::new(u.space().mesh_arc().clone(), Degree::P2)?);
            let s = mollified_goal_vector(&p2, goal)?;
            let mut solver = MultilevelSolver::with_p2(
                hierarchy,
                u.space().boundary_mask().to_vec(),
                p1_to_p2(&p2)?,
                p2.boundary_mask().to_vec(),
                config.solver,
            );
            let w2 = solve_dual(p2, params, &s, &mut solver, tol)?;
            indicator_goal_quadratic(u, &w2, system, params, config.mode)
        }
    }
}

/// The SOLVE, ESTIMATE, MARK, REFINE loop starting from `hierarchy`'s
/// finest level. Each level is warm-started from the interpolated previous
/// solution.
pub fn amr_run(
    hierarchy: MeshHierarchy,
    system: &MolecularSystem,
    config: &AmrConfig,
) -> std::result::Result<AmrRun, AmrFailure> {
    let mut report = AmrReport::default();
    match amr_loop(hierarchy, system, config, &mut report) {
        Ok((hierarchy, solution, indicator)) => Ok(AmrRun { report, hierarchy, solution, indicator }),
        Err(error) => Err(AmrFailure { error, report }),
    }
}

fn amr_loop(
    mut h: MeshHierarchy,
    system: &MolecularSystem,
    config: &AmrConfig,
    report: &mut AmrReport,
) -> Result<(MeshHierarchy, FieldVector, IndicatorField)> {
    config.marking.validate()?;
    config.params.validate()?;
    config.solver.preconditioner.validate()?;
    let goal = if config.marking.indicator.is_goal() {
        let g = match config.sigma {
            Some(s) => GoalFunctional::uniform(system.clone(), s)?,
            None => GoalFunctional::with_default_radius(system.clone(), h.finest())?,
        };
        g.check_interface(h.finest())?;
        g
    } else {
        // Only the system is used by the energy indicator.
        GoalFunctional::uniform(system.clone(), 1.0)?
    };
    let mut previous: Option<Vec<f64>> = None;
    let mut step = 0;
    loop {
        let start = Instant::now();
        let j = h.finest_level();
        let initial = match &previous {
            Some(p) => Some(prolongate_field(&h, j, p)?),
            None => None,
        };
        let (u, newton_iterations, cg_iterations) = solve_level(&h, system, config, initial.as_deref())?;
        let energy = solvation_energy(&u, system)?;
        let eta = estimate(&h, &u, &goal, config)?;
        let est = eta.global_estimate();
        let space = u.space();
        let mut row = LevelRow {
            level: j,
            nodes: space.num_dofs(),
            dofs: space.boundary_mask().iter().filter(|&&b| !b).count(),
            marked_solute: 0,
            marked_solvent: 0,
            energy,
            estimate: est,
            cg_iterations,
            newton_iterations,
            seconds: 0.0,
        };
        log::info!("level {j}: {} nodes, S = {energy:.6} kT, estimate {est:.3e}", row.nodes);
        let done = step == config.max_levels || config.tol.is_some_and(|t| est <= t);
        if !done {
            let marked = match mark(&eta, &config.marking, h.finest().regions()) {
                Ok(m) => m,
                Err(e) => {
                    row.seconds = start.elapsed().as_secs_f64();
                    report.rows.push(row);
                    return Err(e);
                }
            };
            let (m, s) = h.count_regions(&marked);
            row.marked_solute = m;
            row.marked_solvent = s;
            h.bisect_refine(&marked)?;
        }
        row.seconds = start.elapsed().as_secs_f64();
        report.rows.push(row);
        let over = h.finest().num_vertices() > config.max_dof;
        if done || over {
            if !done {
                h.truncate(j);
            }
            return Ok((h, u, eta));
        }
        previous = Some(u.into_values());
        step += 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub level: usize,
    pub variant: PreconditionerVariant,
    /// Nodes on the level.
    pub nodes: usize,
    /// Smoothed nodes `|X_j|` (all nodes on level 0 and for NONE).
    pub smoothed: usize,
    pub ratio: f64,
    pub cg_iterations: usize,
}

pub const BENCH_HEADER: &str = "level,variant,N,X,ratio,cg_iters";

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.16e},{}",
            r.level, r.variant, r.nodes, r.smoothed, r.ratio, r.cg_iterations
        );
    }
    out
}

/// PCG iteration counts for the linearized RPBE on every level of
/// `hierarchy` under each preconditioner variant. Level `j` uses the
/// hierarchy truncated to `j` with operators assembled on each level.
pub fn preconditioner_bench(
    hierarchy: &MeshHierarchy,
    system: &MolecularSystem,
    params: &PbeParameters,
    variants: &[PreconditionerVariant],
    solver: &SolverConfig,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for j in 0..=hierarchy.finest_level() {
        let mut sub = hierarchy.clone();
        sub.truncate(j);
        let space = Arc::new(FeSpace::new(sub.mesh_arc(j), Degree::P1)?);
        let op = RpbeOperator::new(space.clone(), system, params, Nonlinearity::Linear)?;
        let sys = op.linear_system()?;
        let nodes = space.num_dofs();
        for &variant in variants {
            let (smoothed, its) = match variant.smoothing() {
                None => (nodes, pcg(&sys.matrix, &sys.rhs, None, &Identity, solver.tol, solver.max_iter)?.iterations),
                Some(sv) => {
                    let stack = LevelStack::assembled(&sub, &params.coefficients(), sv)?;
                    let config = crate::mlsolve::PreconditionerConfig { variant, ..solver.preconditioner };
                    let m = MultilevelPreconditioner::new(stack, config)?;
                    let res = pcg(&sys.matrix, &sys.rhs, None, &m, solver.tol, solver.max_iter)?;
                    let x = if j == 0 { nodes } else { smoothing_set(&sub, j, sv)?.len() };
                    (x, res.iterations)
                }
            };
            rows.push(BenchRow {
                level: j,
                variant,
                nodes,
                smoothed,
                ratio: smoothed as f64 / nodes as f64,
                cg_iterations: its,
            });
        }
    }
    Ok(rows)
}
