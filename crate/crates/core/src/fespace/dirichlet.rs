use super::{CsrMatrix, FeSpace};
use crate::Point;

/// Fixed dofs and their prescribed values.
#[derive(Clone, Debug)]
pub struct DirichletData {
    pub fixed: Vec<bool>,
    pub values: Vec<f64>,
}

impl DirichletData {
    /// Homogeneous data on the boundary of `space`.
    pub fn homogeneous(space: &FeSpace) -> Self {
        Self { fixed: space.boundary_mask().to_vec(), values: vec![0.0; space.num_dofs()] }
    }

    /// Overwrites the fixed entries of `u` with the prescribed values.
    pub fn impose(&self, u: &mut [f64]) {
        for ((ui, &f), &g) in u.iter_mut().zip(&self.fixed).zip(&self.values) {
            if f {
                *ui = g;
            }
        }
    }

    /// Zeroes the fixed entries of `r`.
    pub fn zero_fixed(&self, r: &mut [f64]) {
        for (ri, &f) in r.iter_mut().zip(&self.fixed) {
            if f {
                *ri = 0.0;
            }
        }
    }
}

/// Samples `g` at the boundary dofs of `space`.
pub fn dirichlet_data(space: &FeSpace, g: impl Fn(&Point) -> f64) -> DirichletData {
    let fixed = space.boundary_mask().to_vec();
    let values = fixed
        .iter()
        .enumerate()
        .map(|(i, &f)| if f { g(&space.dof_point(i)) } else { 0.0 })
        .collect();
    DirichletData { fixed, values }
}

/// Symmetric elimination of fixed dofs: fixed rows and columns are replaced
/// by the identity, and the right-hand side absorbs the lifted data.
pub fn eliminate(a: &CsrMatrix, b: &[f64], bc: &DirichletData) -> (CsrMatrix, Vec<f64>) {
    let n = a.nrows();
    let mut rhs = b.to_vec();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(a.nnz());
    let mut values = Vec::with_capacity(a.nnz());
    row_ptr.push(0);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        if bc.fixed[i] {
            col_idx.push(i);
            values.push(1.0);
            rhs[i] = bc.values[i];
        } else {
            for (&j, &v) in cols.iter().zip(vals) {
                if bc.fixed[j] {
                    rhs[i] -= v * bc.values[j];
                } else if v != 0.0 || i == j {
                    col_idx.push(j);
                    values.push(v);
                }
            }
        }
        row_ptr.push(col_idx.len());
    }
    let symmetric = a.is_symmetric();
    (CsrMatrix::from_parts(n, n, row_ptr, col_idx, values, symmetric), rhs)
}

/// Samples `g` on the boundary of `space` and eliminates those dofs.
pub fn apply_dirichlet(
    a: &CsrMatrix,
    b: &[f64],
    space: &FeSpace,
    g: impl Fn(&Point) -> f64,
) -> (CsrMatrix, Vec<f64>) {
    eliminate(a, b, &dirichlet_data(space, g))
}
