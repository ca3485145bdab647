use crate::fespace::CsrMatrix;
use crate::{Error, Result};

/// Symmetric Gauss-Seidel restricted to the index set `set`: a forward
/// sweep over `set` followed by a backward sweep, repeated `sweeps` times.
/// Entries of `u` outside `set` are left untouched.
pub fn sgs_smooth(a: &CsrMatrix, u: &mut [f64], f: &[f64], set: &[usize], sweeps: usize) -> Result<()> {
    if set.is_empty() || sweeps == 0 {
        return Ok(());
    }
    let mut diag = Vec::with_capacity(set.len());
    for &i in set {
        let d = a.get(i, i);
        if d == 0.0 {
            return Err(Error::ZeroDiagonal(i));
        }
        diag.push(d);
    }
    let update = |u: &mut [f64], i: usize, d: f64| {
        let (cols, vals) = a.row(i);
        let mut s = f[i];
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i {
                s -= v * u[j];
            }
        }
        u[i] = s / d;
    };
    for _ in 0..sweeps {
        for (&i, &d) in set.iter().zip(&diag) {
            update(u, i, d);
        }
        for (&i, &d) in set.iter().zip(&diag).rev() {
            update(u, i, d);
        }
    }
    Ok(())
}
