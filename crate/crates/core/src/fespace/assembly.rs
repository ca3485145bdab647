use super::quadrature::tet_rule;
use super::{CsrMatrix, FeSpace, LocalBasis};
use crate::mesh::Region;
use crate::{geom, Error, Point, Result};

/// Region-wise constant dielectric and ionic coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub eps_solute: f64,
    pub eps_solvent: f64,
    pub kappa2_solute: f64,
    pub kappa2_solvent: f64,
}

impl Coefficients {
    pub fn uniform(eps: f64, kappa2: f64) -> Self {
        Self { eps_solute: eps, eps_solvent: eps, kappa2_solute: kappa2, kappa2_solvent: kappa2 }
    }

    pub fn eps(&self, region: Region) -> f64 {
        match region {
            Region::Solute => self.eps_solute,
            Region::Solvent => self.eps_solvent,
        }
    }

    pub fn kappa2(&self, region: Region) -> f64 {
        match region {
            Region::Solute => self.kappa2_solute,
            Region::Solvent => self.kappa2_solvent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_solute > 0.0 && self.eps_solvent > 0.0) {
            return Err(Error::Parameter(format!(
                "dielectric must be positive (solute {}, solvent {})",
                self.eps_solute, self.eps_solvent
            )));
        }
        if !(self.kappa2_solute >= 0.0 && self.kappa2_solvent >= 0.0) {
            return Err(Error::Parameter("kappa^2 must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Assembles `A_ij = (eps grad phi_j, grad phi_i) + (kappa2 phi_j, phi_i)`
/// with region-wise constant coefficients.
pub fn assemble_operator(space: &FeSpace, coeffs: &Coefficients) -> Result<CsrMatrix> {
    coeffs.validate()?;
    let regions = space.mesh().regions();
    let eps: Vec<f64> = regions.iter().map(|&r| coeffs.eps(r)).collect();
    let kappa2: Vec<f64> = regions.iter().map(|&r| coeffs.kappa2(r)).collect();
    Ok(assemble_weighted(space, &eps, |k, _, _| kappa2[k]))
}

/// Local matrix of `(eps grad u, grad v) + (c u, v)` on element `k`, where
/// the reaction weight `c(k, q, x)` may vary over the points `q` of
/// [`tet_rule`].
pub fn element_operator<F>(space: &FeSpace, k: usize, eps: f64, reaction: &F) -> ([[f64; 10]; 10], usize)
where
    F: Fn(usize, usize, &Point) -> f64,
{
    let rule = tet_rule();
    let g = space.geometry(k);
    let mut local = [[0.0; 10]; 10];
    let mut n = 0;
    for (q, (lambda, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let basis = LocalBasis::eval(space.degree(), g, lambda);
        n = basis.n;
        let x = space.map_point(k, lambda);
        let c = reaction(k, q, &x);
        let wv = w * g.volume;
        for i in 0..n {
            for j in i..n {
                let mut v = eps * geom::dot(&basis.grads[i], &basis.grads[j]);
                if c != 0.0 {
                    v += c * basis.values[i] * basis.values[j];
                }
                local[i][j] += wv * v;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            local[i][j] = local[j][i];
        }
    }
    (local, n)
}

/// Assembles a symmetric operator with element-wise diffusion `eps[k]` and
/// a reaction weight evaluated at each quadrature point. Elements are added
/// in ascending id order.
pub fn assemble_weighted<F>(space: &FeSpace, eps: &[f64], reaction: F) -> CsrMatrix
where
    F: Fn(usize, usize, &Point) -> f64,
{
    let (row_ptr, col_idx) = space.pattern();
    let n = space.num_dofs();
    let mut values = vec![0.0; col_idx.len()];
    for k in 0..space.num_elements() {
        let (local, m) = element_operator(space, k, eps[k], &reaction);
        let (dofs, _) = space.element_dofs(k);
        for i in 0..m {
            let r = dofs[i];
            let row = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            for j in 0..m {
                let p = row_ptr[r] + row.binary_search(&dofs[j]).expect("pattern covers element couplings");
                values[p] += local[i][j];
            }
        }
    }
    CsrMatrix::from_parts(n, n, row_ptr.clone(), col_idx.clone(), values, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::Degree;
    use crate::mesh::{unit_cube_mesh, SimplicialMesh};
    use std::sync::Arc;

    fn reference_tet() -> SimplicialMesh {
        SimplicialMesh::from_elements(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 1, 2, 3]],
            vec![Region::Solute],
        )
        .unwrap()
    }

    #[test]
    fn reference_stiffness_matches_symbolic_integration() {
        let space = FeSpace::new(Arc::new(reference_tet()), Degree::P1).unwrap();
        let a = assemble_operator(&space, &Coefficients::uniform(1.0, 0.0)).unwrap();
        let expected = [
            [3.0, -1.0, -1.0, -1.0],
            [-1.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((a.get(i, j) - expected[i][j] / 6.0).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn reference_mass_matrix() {
        // P1 mass matrix on a tet is |K| (1 + delta_ij) / 20.
        let space = FeSpace::new(Arc::new(reference_tet()), Degree::P1).unwrap();
        let a = assemble_operator(&space, &Coefficients::uniform(1e-300, 1.0)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let m = if i == j { 2.0 } else { 1.0 } / 120.0;
                assert!((a.get(i, j) - m).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_are_in_the_kernel_and_operator_is_symmetric() {
        for degree in [Degree::P1, Degree::P2] {
            let space = FeSpace::new(Arc::new(unit_cube_mesh(2)), degree).unwrap();
            let a = assemble_operator(&space, &Coefficients::uniform(2.5, 0.0)).unwrap();
            let ones = vec![1.0; space.num_dofs()];
            let r = a.mul_vec(&ones);
            assert!(r.iter().all(|v| v.abs() < 1e-13), "{degree:?}");
            assert_eq!(a.asymmetry(), 0.0);
        }
    }

    #[test]
    fn rejects_nonpositive_dielectric() {
        let space = FeSpace::new(Arc::new(reference_tet()), Degree::P1).unwrap();
        assert!(assemble_operator(&space, &Coefficients::uniform(0.0, 0.0)).is_err());
    }
}
