use sprs::{CsMat, FillInReduction};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::fespace::CsrMatrix;
use crate::{Error, Result};

/// Sparse `L D L^T` factorization in reverse Cuthill-McKee order, used for
/// the coarsest level operator and for small direct solves.
pub struct CoarseSolver {
    factor: LdlNumeric<f64, usize>,
}

impl std::fmt::Debug for CoarseSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoarseSolver").field("n", &self.factor.problem_size()).finish()
    }
}

impl CoarseSolver {
    /// Factors a symmetric matrix; fails unless it is positive definite.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mat = CsMat::try_new(
            (a.nrows(), a.ncols()),
            a.row_ptr().to_vec(),
            a.col_idx().to_vec(),
            a.values().to_vec(),
        )
        .map_err(|(_, _, _, e)| Error::Dimension(format!("coarse operator: {e}")))?;
        let factor = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .numeric(mat.view())
            .map_err(|_| Error::NotSpd { iteration: 0 })?;
        if !factor.d().iter().all(|&d| d > 0.0) {
            return Err(Error::NotSpd { iteration: 0 });
        }
        Ok(Self { factor })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor.solve(b)
    }
}
