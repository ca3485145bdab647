use crate::fespace::CsrMatrix;
use crate::{Error, Result};

/// Symmetric positive definite approximate inverse `z = B r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
}

/// `B = I`.
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PcgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residuals `|r_k| / |b|`, starting with `k = 0`.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients. Stops once
/// `|b - A x| <= tol |b|`.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    precond: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<PcgResult> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension(format!("{}x{} matrix, rhs of length {n}", a.nrows(), a.ncols())));
    }
    let bnorm = dot(b, b).sqrt();
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    if bnorm == 0.0 {
        return Ok(PcgResult { x: vec![0.0; n], iterations: 0, history: vec![0.0] });
    }
    let mut r = b.to_vec();
    if x0.is_some() {
        let ax = a.mul_vec(&x);
        for i in 0..n {
            r[i] -= ax[i];
        }
    }
    let mut history = vec![dot(&r, &r).sqrt() / bnorm];
    if history[0] <= tol {
        return Ok(PcgResult { x, iterations: 0, history });
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z)?;
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Err(Error::NotSpd { iteration: 0 });
    }
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd { iteration: it });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = dot(&r, &r).sqrt() / bnorm;
        history.push(rel);
        if rel <= tol {
            return Ok(PcgResult { x, iterations: it, history });
        }
        precond.apply(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        if !(rz_new > 0.0) {
            return Err(Error::NotSpd { iteration: it });
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { max_iter, history })
}
