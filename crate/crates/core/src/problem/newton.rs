use super::{Nonlinearity, RpbeOperator};
use crate::fespace::{CsrMatrix, FieldVector};
use crate::{Error, Result};

/// Solver for the eliminated SPD systems arising in Newton's method.
pub trait LinearSolver {
    /// Returns `x` with `|b - A x| <= rtol |b|` and the iteration count.
    fn solve(&mut self, a: &CsrMatrix, b: &[f64], rtol: f64) -> Result<(Vec<f64>, usize)>;
}

impl<F> LinearSolver for F
where
    F: FnMut(&CsrMatrix, &[f64], f64) -> Result<(Vec<f64>, usize)>,
{
    fn solve(&mut self, a: &CsrMatrix, b: &[f64], rtol: f64) -> Result<(Vec<f64>, usize)> {
        self(a, b, rtol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    /// Stop once `|R(u)| <= tol |R(u_init)|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings tried before accepting a non-decreasing step.
    pub max_halvings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 30, max_halvings: 10 }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub solution: FieldVector,
    pub iterations: usize,
    pub linear_iterations: usize,
    /// `|R(u_k)|` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped inexact Newton iteration for `R(u) = 0`.
///
/// The inner tolerance is `min(0.5, sqrt(|R_k| / |R_0|))`, never tighter
/// than needed to reach the outer tolerance in one more step. For the
/// linearized operator a single step with a tight inner solve suffices.
pub fn newton_solve(
    op: &RpbeOperator,
    initial: Option<&[f64]>,
    solver: &mut dyn LinearSolver,
    config: &NewtonConfig,
) -> Result<NewtonReport> {
    let mut u = match initial {
        Some(u0) => u0.to_vec(),
        None => op.initial_guess(),
    };
    op.dirichlet().impose(&mut u);
    let mut r = op.residual(&u)?;
    let mut rn = norm(&r);
    let r0 = rn;
    // Terms cancel in R near convergence; below this level it is roundoff.
    let floor = 1e-14 * (norm(op.dielectric_load()) + norm(&op.stiffness().mul_vec(&u)));
    let target = (config.tol * r0).max(floor);
    let mut history = vec![rn];
    let mut linear_iterations = 0;
    let mut iterations = 0;
    while rn > target {
        if iterations == config.max_iter {
            return Err(Error::NewtonNoConvergence { max_iter: config.max_iter, history });
        }
        let needed = 0.1 * target / rn;
        let rtol = match op.mode() {
            Nonlinearity::Linear => needed,
            Nonlinearity::Sinh => (rn / r0).sqrt().min(0.5).max(needed),
        };
        let j = op.jacobian(&u)?;
        let (s, its) = solver.solve(&j, &r, rtol)?;
        linear_iterations += its;

        let mut lambda = 1.0;
        let mut accepted = None;
        let mut last_ok = None;
        for _ in 0..=config.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&s).map(|(a, b)| a + lambda * b).collect();
            match op.residual(&trial) {
                Ok(rt) => {
                    let n = norm(&rt);
                    if n < rn {
                        accepted = Some((trial, rt, n));
                        break;
                    }
                    last_ok = Some((trial, rt, n));
                }
                Err(Error::Overflow { .. }) => {}
                Err(e) => return Err(e),
            }
            lambda *= 0.5;
        }
        let (trial, rt, n) = match accepted.or(last_ok) {
            Some(t) => t,
            None => {
                let value = u.iter().zip(&s).map(|(a, b)| (a + lambda * b).abs()).fold(0.0, f64::max);
                return Err(Error::Overflow { value });
            }
        };
        if lambda < 1.0 {
            log::debug!("Newton step {iterations} damped to {lambda}");
        }
        u = trial;
        r = rt;
        rn = n;
        history.push(rn);
        iterations += 1;
    }
    Ok(NewtonReport { solution: op.field(u)?, iterations, linear_iterations, residual_history: history })
}
