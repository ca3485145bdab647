use std::fmt;
use std::str::FromStr;

use super::{pcg, sgs_smooth, CoarseSolver, PcgResult, Preconditioner};
use crate::fespace::{assemble_operator, eliminate, prolongation, Coefficients, CsrMatrix, DirichletData, Degree, FeSpace};
use crate::mesh::{smoothing_set, MeshHierarchy, SmoothingVariant};
use crate::problem::LinearSolver;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PreconditionerVariant {
    None,
    Mg,
    Hb,
    Bpx,
    Bek,
    OneRing,
    AdditiveBpx,
    AdditiveHb,
}

impl PreconditionerVariant {
    pub const ALL: [Self; 8] = [
        Self::None,
        Self::Mg,
        Self::Hb,
        Self::Bpx,
        Self::Bek,
        Self::OneRing,
        Self::AdditiveBpx,
        Self::AdditiveHb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "NONE",
            Self::Mg => "MG",
            Self::Hb => "HB",
            Self::Bpx => "BPX",
            Self::Bek => "BEK",
            Self::OneRing => "ONERING",
            Self::AdditiveBpx => "ADDITIVE_BPX",
            Self::AdditiveHb => "ADDITIVE_HB",
        }
    }

    /// Node sets the variant works on, `None` for no preconditioning.
    pub fn smoothing(self) -> Option<SmoothingVariant> {
        match self {
            Self::None => None,
            Self::Mg => Some(SmoothingVariant::Mg),
            Self::Hb | Self::AdditiveHb => Some(SmoothingVariant::Hb),
            Self::Bpx | Self::AdditiveBpx => Some(SmoothingVariant::Bpx),
            Self::Bek => Some(SmoothingVariant::Bek),
            Self::OneRing => Some(SmoothingVariant::OneRing),
        }
    }

    pub fn is_additive(self) -> bool {
        matches!(self, Self::AdditiveBpx | Self::AdditiveHb)
    }
}

impl fmt::Display for PreconditionerVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PreconditionerVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let u = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|v| v.name() == u)
            .ok_or_else(|| Error::Parameter(format!("unknown preconditioner '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreconditionerConfig {
    pub variant: PreconditionerVariant,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    /// Solve the coarsest level exactly instead of smoothing it.
    pub coarse_direct: bool,
    /// Additive variants: use `G_j` (restricted symmetric Gauss-Seidel)
    /// instead of the scaling `2^j I`.
    pub smoothed_additive: bool,
}

impl Default for PreconditionerConfig {
    fn default() -> Self {
        Self {
            variant: PreconditionerVariant::Mg,
            pre_sweeps: 2,
            post_sweeps: 2,
            coarse_direct: true,
            smoothed_additive: false,
        }
    }
}

impl PreconditionerConfig {
    pub fn validate(&self) -> Result<()> {
        let multiplicative = !self.variant.is_additive() && self.variant != PreconditionerVariant::None;
        if multiplicative && (self.pre_sweeps == 0 || self.post_sweeps == 0) {
            return Err(Error::Parameter("multiplicative variants need at least one sweep".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub preconditioner: PreconditionerConfig,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { preconditioner: PreconditionerConfig::default(), tol: 1e-8, max_iter: 5000 }
    }
}

/// Level operators, masked prolongations and node sets of a multilevel
/// preconditioner.
#[derive(Debug)]
pub struct LevelStack {
    ops: Vec<CsrMatrix>,
    /// `prolong[j]` maps level `j - 1` to level `j`; `prolong[0]` is unused.
    prolong: Vec<CsrMatrix>,
    /// Free nodes of each level's set (smoothing set, or all free nodes on
    /// level 0).
    sets: Vec<Vec<usize>>,
    fixed: Vec<Vec<bool>>,
    coarse: CoarseSolver,
}

/// Drops entries in fixed rows and fixed columns.
fn mask(p: &CsrMatrix, fixed_rows: &[bool], fixed_cols: &[bool]) -> CsrMatrix {
    let mut trip = Vec::with_capacity(p.nnz());
    for i in (0..p.nrows()).filter(|&i| !fixed_rows[i]) {
        let (cols, vals) = p.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if !fixed_cols[j] {
                trip.push((i, j, v));
            }
        }
    }
    CsrMatrix::from_triplets(p.nrows(), p.ncols(), &trip)
}

/// `P^T A P` for a masked `P`, with unit diagonal on the fixed coarse rows.
fn restrict(a: &CsrMatrix, p: &CsrMatrix, coarse_fixed: &[bool]) -> CsrMatrix {
    let c = a.galerkin(p);
    let mut trip = Vec::with_capacity(c.nnz() + coarse_fixed.len());
    for i in 0..c.nrows() {
        let (cols, vals) = c.row(i);
        for (&k, &v) in cols.iter().zip(vals) {
            if v != 0.0 {
                trip.push((i, k, v));
            }
        }
        if coarse_fixed[i] {
            trip.push((i, i, 1.0));
        }
    }
    let mut c = CsrMatrix::from_triplets(c.nrows(), c.ncols(), &trip);
    c.set_symmetric(true);
    c
}

fn free(set: impl IntoIterator<Item = usize>, fixed: &[bool]) -> Vec<usize> {
    set.into_iter().filter(|&i| !fixed[i]).collect()
}

impl LevelStack {
    /// Builds a stack from eliminated level operators, unmasked
    /// prolongations (`prolong[j]` from level `j - 1` to `j`, entry 0
    /// ignored), per-level node sets (entry 0 ignored) and fixed masks.
    pub fn new(
        ops: Vec<CsrMatrix>,
        prolong: Vec<CsrMatrix>,
        sets: Vec<Vec<usize>>,
        fixed: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let n = ops.len();
        if n == 0 || prolong.len() != n || sets.len() != n || fixed.len() != n {
            return Err(Error::Dimension("level stack components differ in length".into()));
        }
        for j in 0..n {
            if ops[j].nrows() != fixed[j].len() || ops[j].ncols() != fixed[j].len() {
                return Err(Error::Dimension(format!("level {j} operator and mask disagree")));
            }
            if j > 0 && (prolong[j].nrows() != ops[j].nrows() || prolong[j].ncols() != ops[j - 1].nrows()) {
                return Err(Error::Dimension(format!("prolongation into level {j} has the wrong shape")));
            }
        }
        let coarse = CoarseSolver::new(&ops[0])?;
        let mut masked = vec![CsrMatrix::identity(0)];
        let mut free_sets = vec![free(0..fixed[0].len(), &fixed[0])];
        for j in 1..n {
            masked.push(mask(&prolong[j], &fixed[j], &fixed[j - 1]));
            free_sets.push(free(sets[j].iter().copied(), &fixed[j]));
        }
        Ok(Self { ops, prolong: masked, sets: free_sets, fixed, coarse })
    }

    /// Stack of P1 operators assembled on every level of `hierarchy`, with
    /// the boundary nodes of each level fixed.
    pub fn assembled(hierarchy: &MeshHierarchy, coeffs: &Coefficients, variant: SmoothingVariant) -> Result<Self> {
        let mut ops = Vec::new();
        let mut fixed = Vec::new();
        for j in 0..=hierarchy.finest_level() {
            let space = FeSpace::new(hierarchy.mesh_arc(j), Degree::P1)?;
            let a = assemble_operator(&space, coeffs)?;
            let bc = DirichletData::homogeneous(&space);
            ops.push(eliminate(&a, &vec![0.0; a.nrows()], &bc).0);
            fixed.push(bc.fixed);
        }
        let (prolong, sets) = Self::transfer(hierarchy, variant)?;
        Self::new(ops, prolong, sets, fixed)
    }

    /// Stack whose coarse operators are Galerkin products
    /// `P^T A_j P` of the eliminated finest operator `fine`.
    pub fn galerkin(
        hierarchy: &MeshHierarchy,
        fine: CsrMatrix,
        fine_fixed: &[bool],
        variant: SmoothingVariant,
    ) -> Result<Self> {
        let finest = hierarchy.finest_level();
        if fine.nrows() != hierarchy.num_nodes(finest) || fine_fixed.len() != fine.nrows() {
            return Err(Error::Dimension("Galerkin stack needs a finest-level P1 operator".into()));
        }
        let fixed: Vec<Vec<bool>> =
            (0..=finest).map(|j| fine_fixed[..hierarchy.num_nodes(j)].to_vec()).collect();
        let (prolong, sets) = Self::transfer(hierarchy, variant)?;
        let mut ops = vec![fine];
        for j in (1..=finest).rev() {
            let p = mask(&prolong[j], &fixed[j], &fixed[j - 1]);
            let c = restrict(ops.last().unwrap(), &p, &fixed[j - 1]);
            ops.push(c);
        }
        ops.reverse();
        Self::new(ops, prolong, sets, fixed)
    }

    fn transfer(hierarchy: &MeshHierarchy, variant: SmoothingVariant) -> Result<(Vec<CsrMatrix>, Vec<Vec<usize>>)> {
        let mut prolong = vec![CsrMatrix::identity(0)];
        let mut sets = vec![Vec::new()];
        for j in 1..=hierarchy.finest_level() {
            prolong.push(prolongation(hierarchy, j)?);
            sets.push(smoothing_set(hierarchy, j, variant)?);
        }
        Ok((prolong, sets))
    }

    /// Appends a finer level, e.g. a P2 space on the finest mesh with the
    /// P1 embedding as prolongation. Every free dof of the new level is
    /// smoothed.
    pub fn push_level(&mut self, op: CsrMatrix, prolong: &CsrMatrix, fixed: Vec<bool>) -> Result<()> {
        let top = self.num_levels() - 1;
        if prolong.ncols() != self.ops[top].nrows() || prolong.nrows() != op.nrows() || fixed.len() != op.nrows() {
            return Err(Error::Dimension("pushed level does not match the stack".into()));
        }
        self.prolong.push(mask(prolong, &fixed, &self.fixed[top]));
        self.sets.push(free(0..fixed.len(), &fixed));
        self.ops.push(op);
        self.fixed.push(fixed);
        Ok(())
    }

    pub fn num_levels(&self) -> usize {
        self.ops.len()
    }

    pub fn finest_level(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn operator(&self, level: usize) -> &CsrMatrix {
        &self.ops[level]
    }

    /// Masked prolongation from `level - 1` to `level`.
    pub fn prolongation(&self, level: usize) -> &CsrMatrix {
        &self.prolong[level]
    }

    /// Free nodes of the node set on `level`.
    pub fn set(&self, level: usize) -> &[usize] {
        &self.sets[level]
    }

    pub fn fixed(&self, level: usize) -> &[bool] {
        &self.fixed[level]
    }

    pub fn coarse_solve(&self, b: &[f64]) -> Vec<f64> {
        self.coarse.solve(b)
    }
}

fn residual(a: &CsrMatrix, u: &[f64], f: &[f64]) -> Vec<f64> {
    let mut r = a.mul_vec(u);
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = fi - *ri;
    }
    r
}

/// One V-cycle on `level` for `A_level u = f`, updating `u` in place:
/// pre-smooth on `X_j`, restrict the residual, recurse from a zero coarse
/// guess, add the prolonged correction, post-smooth on `X_j`.
pub fn mg_vcycle(
    stack: &LevelStack,
    config: &PreconditionerConfig,
    u: &mut [f64],
    f: &[f64],
    level: usize,
) -> Result<()> {
    let a = stack.operator(level);
    if level == 0 {
        if config.coarse_direct {
            u.copy_from_slice(&stack.coarse_solve(f));
        } else {
            sgs_smooth(a, u, f, stack.set(0), config.pre_sweeps + config.post_sweeps)?;
        }
        return Ok(());
    }
    sgs_smooth(a, u, f, stack.set(level), config.pre_sweeps)?;
    let p = stack.prolongation(level);
    let rc = p.transpose_mul(&residual(a, u, f));
    let mut ec = vec![0.0; rc.len()];
    mg_vcycle(stack, config, &mut ec, &rc, level - 1)?;
    let corr = p.mul_vec(&ec);
    for (ui, ci) in u.iter_mut().zip(&corr) {
        *ui += ci;
    }
    sgs_smooth(a, u, f, stack.set(level), config.post_sweeps)
}

/// `z = sum_j P_j D_j P_j^T r` over all levels, with composite
/// prolongations applied level by level. `D_j` is `2^j I` on the level's
/// node set, or one restricted symmetric Gauss-Seidel sweep when
/// `config.smoothed_additive` is set (the coarsest level then uses the
/// direct solve if `config.coarse_direct`).
pub fn additive_apply(stack: &LevelStack, config: &PreconditionerConfig, r: &[f64]) -> Result<Vec<f64>> {
    let top = stack.finest_level();
    let mut restricted = vec![r.to_vec()];
    for j in (1..=top).rev() {
        let next = stack.prolongation(j).transpose_mul(restricted.last().unwrap());
        restricted.push(next);
    }
    restricted.reverse();
    let level_term = |j: usize| -> Result<Vec<f64>> {
        let rj = &restricted[j];
        let mut d = vec![0.0; rj.len()];
        if config.smoothed_additive {
            if j == 0 && config.coarse_direct {
                return Ok(stack.coarse_solve(rj));
            }
            sgs_smooth(stack.operator(j), &mut d, rj, stack.set(j), 1)?;
        } else {
            let scale = 2f64.powi(j as i32);
            for &i in stack.set(j) {
                d[i] = scale * rj[i];
            }
        }
        Ok(d)
    };
    let mut z = level_term(0)?;
    for j in 1..=top {
        let mut next = stack.prolongation(j).mul_vec(&z);
        for (a, b) in next.iter_mut().zip(level_term(j)?) {
            *a += b;
        }
        z = next;
    }
    Ok(z)
}

/// A [`LevelStack`] with its configuration, usable inside PCG. Fixed dofs
/// of the finest level are preconditioned by the inverse diagonal.
#[derive(Debug)]
pub struct MultilevelPreconditioner {
    pub stack: Option<LevelStack>,
    pub config: PreconditionerConfig,
    diag: Vec<f64>,
}

impl MultilevelPreconditioner {
    pub fn new(stack: LevelStack, config: PreconditionerConfig) -> Result<Self> {
        config.validate()?;
        let diag = stack.operator(stack.finest_level()).diagonal();
        let stack = (config.variant != PreconditionerVariant::None).then_some(stack);
        Ok(Self { stack, config, diag })
    }
}

impl Preconditioner for MultilevelPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let Some(stack) = &self.stack else {
            z.copy_from_slice(r);
            return Ok(());
        };
        let top = stack.finest_level();
        let fixed = stack.fixed(top);
        let mut rf = r.to_vec();
        for i in (0..rf.len()).filter(|&i| fixed[i]) {
            rf[i] = 0.0;
        }
        let out = if self.config.variant.is_additive() {
            additive_apply(stack, &self.config, &rf)?
        } else {
            let mut u = vec![0.0; r.len()];
            mg_vcycle(stack, &self.config, &mut u, &rf, top)?;
            u
        };
        z.copy_from_slice(&out);
        for i in (0..z.len()).filter(|&i| fixed[i]) {
            z[i] = r[i] / self.diag[i];
        }
        Ok(())
    }
}

/// PCG with a Galerkin multilevel preconditioner rebuilt for every matrix;
/// used for Newton's Jacobian systems.
pub struct MultilevelSolver<'h> {
    hierarchy: &'h MeshHierarchy,
    fixed: Vec<bool>,
    config: SolverConfig,
    /// Embedding of the finest P1 space into a P2 space and the P2 fixed
    /// mask, when solving P2 systems.
    top: Option<(CsrMatrix, Vec<bool>)>,
    /// PCG iteration counts of every solve so far.
    pub iterations: Vec<usize>,
}

impl<'h> MultilevelSolver<'h> {
    pub fn new(hierarchy: &'h MeshHierarchy, fixed: Vec<bool>, config: SolverConfig) -> Self {
        Self { hierarchy, fixed, config, top: None, iterations: Vec::new() }
    }

    /// Solver for P2 systems on the finest mesh: the P1 hierarchy with the
    /// P2 space appended as an extra level, reached through `embedding`.
    pub fn with_p2(
        hierarchy: &'h MeshHierarchy,
        fixed: Vec<bool>,
        embedding: CsrMatrix,
        p2_fixed: Vec<bool>,
        config: SolverConfig,
    ) -> Self {
        Self { hierarchy, fixed, config, top: Some((embedding, p2_fixed)), iterations: Vec::new() }
    }

    pub fn solve_with(&mut self, a: &CsrMatrix, b: &[f64], rtol: f64) -> Result<PcgResult> {
        let pc = &self.config.preconditioner;
        let res = match pc.variant.smoothing() {
            None => pcg(a, b, None, &super::Identity, rtol, self.config.max_iter)?,
            Some(sv) => {
                let stack = match &self.top {
                    None => LevelStack::galerkin(self.hierarchy, a.clone(), &self.fixed, sv)?,
                    Some((e, p2_fixed)) => {
                        if e.nrows() != a.nrows() || p2_fixed.len() != a.nrows() || e.ncols() != self.fixed.len() {
                            return Err(Error::Dimension("P2 system does not match the embedding".into()));
                        }
                        let p1 = restrict(a, &mask(e, p2_fixed, &self.fixed), &self.fixed);
                        let mut stack = LevelStack::galerkin(self.hierarchy, p1, &self.fixed, sv)?;
                        stack.push_level(a.clone(), e, p2_fixed.clone())?;
                        stack
                    }
                };
                let m = MultilevelPreconditioner::new(stack, *pc)?;
                pcg(a, b, None, &m, rtol, self.config.max_iter)?
            }
        };
        self.iterations.push(res.iterations);
        Ok(res)
    }
}

impl LinearSolver for MultilevelSolver<'_> {
    fn solve(&mut self, a: &CsrMatrix, b: &[f64], rtol: f64) -> Result<(Vec<f64>, usize)> {
        let r = self.solve_with(a, b, rtol)?;
        Ok((r.x, r.iterations))
    }
}
