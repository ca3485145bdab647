use std::sync::Arc;

use crate::fespace::{assemble_operator, eliminate, DirichletData, FeSpace, FieldVector};
use crate::problem::{LinearSolver, PbeParameters};
use crate::{Error, Result};

/// Solves the linearized dual problem `a(v, w) + (kappa2 v, w) = S(v)` on
/// `space` with homogeneous Dirichlet data, to relative residual `tol`.
pub fn solve_dual(
    space: Arc<FeSpace>,
    params: &PbeParameters,
    s: &[f64],
    solver: &mut dyn LinearSolver,
    tol: f64,
) -> Result<FieldVector> {
    if s.len() != space.num_dofs() {
        return Err(Error::Dimension(format!("goal vector has {} entries, space has {} dofs", s.len(), space.num_dofs())));
    }
    params.validate()?;
    let a = assemble_operator(&space, &params.coefficients())?;
    let bc = DirichletData::homogeneous(&space);
    let (a, b) = eliminate(&a, s, &bc);
    if b.iter().all(|&v| v == 0.0) {
        return Ok(FieldVector::zeros(space));
    }
    let (w, _) = solver.solve(&a, &b, tol)?;
    FieldVector::new(space, w)
}
