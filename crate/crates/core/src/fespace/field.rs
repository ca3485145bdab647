use std::sync::Arc;

use super::{FeSpace, LocalBasis};
use crate::{Error, Point, Result};

/// Coefficient vector over a finite element space.
#[derive(Clone, Debug)]
pub struct FieldVector {
    space: Arc<FeSpace>,
    values: Vec<f64>,
}

impl FieldVector {
    pub fn new(space: Arc<FeSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.num_dofs() {
            return Err(Error::Dimension(format!(
                "field has {} coefficients, space has {} dofs",
                values.len(),
                space.num_dofs()
            )));
        }
        Ok(Self { space, values })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.num_dofs();
        Self { space, values: vec![0.0; n] }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(space: Arc<FeSpace>, f: impl Fn(&Point) -> f64) -> Self {
        let values = (0..space.num_dofs()).map(|i| f(&space.dof_point(i))).collect();
        Self { space, values }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Local coefficients of element `k` in local basis order.
    pub fn element_coeffs(&self, k: usize) -> [f64; 10] {
        let (dofs, n) = self.space.element_dofs(k);
        let mut c = [0.0; 10];
        for i in 0..n {
            c[i] = self.values[dofs[i]];
        }
        c
    }

    /// Value and gradient inside element `k` at barycentric point `lambda`.
    pub fn eval_local(&self, k: usize, lambda: &[f64; 4]) -> (f64, Point) {
        let basis = LocalBasis::eval(self.space.degree(), self.space.geometry(k), lambda);
        basis.combine(&self.element_coeffs(k))
    }

    /// Point value; fails if `x` lies outside the mesh.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        let (k, lambda) = self.space.locate(x)?;
        Ok(self.eval_local(k, &lambda).0)
    }

    /// Gradient at `x`, taken from the first element containing it.
    pub fn gradient(&self, x: &Point) -> Result<Point> {
        let (k, lambda) = self.space.locate(x)?;
        Ok(self.eval_local(k, &lambda).1)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}
