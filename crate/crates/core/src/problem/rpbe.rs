use std::sync::Arc;

use super::{coulomb, screened_boundary_value, BcKind, MolecularSystem, PbeParameters};
use crate::fespace::quadrature::tet_rule;
use crate::fespace::{assemble_weighted, eliminate, CsrMatrix, DirichletData, FeSpace, FieldVector, LocalBasis};
use crate::mesh::Region;
use crate::{geom, Error, Result};

/// Largest `|u + u_c|` accepted inside `sinh`/`cosh`.
const MAX_EXP_ARG: f64 = 700.0;
const NO_SLOT: usize = usize::MAX;

/// Form of the ionic term `(kappa2 f(u + u_c), v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Nonlinearity {
    /// `f = sinh`: the nonlinear RPBE.
    Sinh,
    /// `f(t) = t`: the linearized RPBE.
    Linear,
}

/// Eliminated linear system `A x = b` with its Dirichlet data.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dirichlet: DirichletData,
}

/// The discrete RPBE on one finite element space, with the parts that do
/// not depend on the iterate precomputed.
#[derive(Clone, Debug)]
pub struct RpbeOperator {
    space: Arc<FeSpace>,
    eps: Vec<f64>,
    kappa2: Vec<f64>,
    stiffness: CsrMatrix,
    load: Vec<f64>,
    /// Row of `coulomb_q` holding `u_c` at the quadrature points of each
    /// element with `kappa2 > 0`.
    slot: Vec<usize>,
    coulomb_q: Vec<[f64; 14]>,
    dirichlet: DirichletData,
    mode: Nonlinearity,
}

impl RpbeOperator {
    pub fn new(
        space: Arc<FeSpace>,
        system: &MolecularSystem,
        params: &PbeParameters,
        mode: Nonlinearity,
    ) -> Result<Self> {
        params.validate()?;
        let mesh = space.mesh();
        let coeffs = params.coefficients();
        let eps: Vec<f64> = mesh.regions().iter().map(|&r| coeffs.eps(r)).collect();
        let kappa2: Vec<f64> = mesh.regions().iter().map(|&r| coeffs.kappa2(r)).collect();
        check_atoms(&space, system)?;

        let stiffness = assemble_weighted(&space, &eps, |_, _, _| 0.0);
        let rule = tet_rule();
        let mut load = vec![0.0; space.num_dofs()];
        let mut slot = vec![NO_SLOT; space.num_elements()];
        let mut coulomb_q = Vec::new();
        for k in 0..space.num_elements() {
            let de = eps[k] - params.eps_m;
            if de == 0.0 && kappa2[k] == 0.0 {
                continue;
            }
            let g = space.geometry(k);
            let (dofs, _) = space.element_dofs(k);
            let mut uc = [0.0; 14];
            for (q, (lambda, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let x = space.map_point(k, lambda);
                let (v, grad) = coulomb(system, params, &x)?;
                uc[q] = v;
                if de != 0.0 {
                    let basis = LocalBasis::eval(space.degree(), g, lambda);
                    for i in 0..basis.n {
                        load[dofs[i]] -= w * g.volume * de * geom::dot(&grad, &basis.grads[i]);
                    }
                }
            }
            if kappa2[k] != 0.0 {
                slot[k] = coulomb_q.len();
                coulomb_q.push(uc);
            }
        }

        let dirichlet = match params.bc {
            BcKind::Zero => DirichletData::homogeneous(&space),
            BcKind::Screened => {
                let fixed = space.boundary_mask().to_vec();
                let mut values = vec![0.0; space.num_dofs()];
                for i in (0..values.len()).filter(|&i| fixed[i]) {
                    values[i] = screened_boundary_value(system, params, &space.dof_point(i))?;
                }
                DirichletData { fixed, values }
            }
        };
        Ok(Self { space, eps, kappa2, stiffness, load, slot, coulomb_q, dirichlet, mode })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn dirichlet(&self) -> &DirichletData {
        &self.dirichlet
    }

    pub fn mode(&self) -> Nonlinearity {
        self.mode
    }

    /// `(eps grad u, grad v)` without constraints.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// `-((eps - eps_m) grad u_c, grad phi_i)`.
    pub fn dielectric_load(&self) -> &[f64] {
        &self.load
    }

    /// Element-wise dielectric and `kappa2`.
    pub fn coefficients(&self) -> (&[f64], &[f64]) {
        (&self.eps, &self.kappa2)
    }

    /// `u_c` at the [`tet_rule`] points of element `k`, if `kappa2 > 0` there.
    pub fn coulomb_at_quadrature(&self, k: usize) -> Option<&[f64; 14]> {
        match self.slot[k] {
            NO_SLOT => None,
            s => Some(&self.coulomb_q[s]),
        }
    }

    /// Zero interior values with the boundary data imposed.
    pub fn initial_guess(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.space.num_dofs()];
        self.dirichlet.impose(&mut u);
        u
    }

    /// Calls `visit(k, q, w |K|, basis, u(x_q) + u_c(x_q))` for every
    /// quadrature point of every element with `kappa2 > 0`.
    fn for_ionic_points(&self, u: &[f64], mut visit: impl FnMut(usize, f64, &LocalBasis, f64) -> Result<()>) -> Result<()> {
        let rule = tet_rule();
        for k in 0..self.space.num_elements() {
            let Some(uc) = self.coulomb_at_quadrature(k) else { continue };
            let g = self.space.geometry(k);
            let (dofs, n) = self.space.element_dofs(k);
            for (q, (lambda, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let basis = LocalBasis::eval(self.space.degree(), g, lambda);
                let uq: f64 = (0..n).map(|i| u[dofs[i]] * basis.values[i]).sum();
                visit(k, w * g.volume, &basis, uq + uc[q])?;
            }
        }
        Ok(())
    }

    fn check_arg(&self, t: f64) -> Result<()> {
        if self.mode == Nonlinearity::Sinh && !(t.abs() <= MAX_EXP_ARG) {
            return Err(Error::Overflow { value: t });
        }
        Ok(())
    }

    /// `(kappa2 f(u + u_c), phi_i)`.
    pub fn ionic_term(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.space.num_dofs()];
        self.for_ionic_points(u, |k, wv, basis, t| {
            self.check_arg(t)?;
            let f = match self.mode {
                Nonlinearity::Sinh => t.sinh(),
                Nonlinearity::Linear => t,
            };
            let (dofs, _) = self.space.element_dofs(k);
            for i in 0..basis.n {
                out[dofs[i]] += wv * self.kappa2[k] * f * basis.values[i];
            }
            Ok(())
        })?;
        Ok(out)
    }

    /// Weak residual `L(phi_i) - a(u, phi_i) - (kappa2 f(u + u_c), phi_i)`,
    /// zero on fixed dofs.
    pub fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let mut r = self.ionic_term(u)?;
        let au = self.stiffness.mul_vec(u);
        for i in 0..r.len() {
            r[i] = self.load[i] - au[i] - r[i];
        }
        self.dirichlet.zero_fixed(&mut r);
        Ok(r)
    }

    /// `a(w, v) + (kappa2 f'(u + u_c) w, v)` without constraints.
    pub fn jacobian_unconstrained(&self, u: &[f64]) -> Result<CsrMatrix> {
        self.check_len(u)?;
        // Quadrature values of f'(u + u_c), indexed like `coulomb_q`.
        let mut weight = vec![[0.0; 14]; self.coulomb_q.len()];
        let mut q_count = vec![0usize; self.coulomb_q.len()];
        self.for_ionic_points(u, |k, _, _, t| {
            self.check_arg(t)?;
            let s = self.slot[k];
            weight[s][q_count[s]] = match self.mode {
                Nonlinearity::Sinh => t.cosh(),
                Nonlinearity::Linear => 1.0,
            };
            q_count[s] += 1;
            Ok(())
        })?;
        Ok(assemble_weighted(&self.space, &self.eps, |k, q, _| match self.slot[k] {
            NO_SLOT => 0.0,
            s => self.kappa2[k] * weight[s][q],
        }))
    }

    /// Jacobian with fixed rows and columns replaced by the identity.
    pub fn jacobian(&self, u: &[f64]) -> Result<CsrMatrix> {
        let j = self.jacobian_unconstrained(u)?;
        let zero = DirichletData { fixed: self.dirichlet.fixed.clone(), values: vec![0.0; j.nrows()] };
        Ok(eliminate(&j, &vec![0.0; j.nrows()], &zero).0)
    }

    /// The linearized RPBE `a(u, v) + (kappa2 u, v) = L(v) - (kappa2 u_c, v)`
    /// with the boundary data eliminated.
    pub fn linear_system(&self) -> Result<LinearSystem> {
        let a = assemble_weighted(&self.space, &self.eps, |k, _, _| self.kappa2[k]);
        let mut b = self.load.clone();
        let zero = vec![0.0; self.space.num_dofs()];
        self.for_ionic_points(&zero, |k, wv, basis, uc| {
            let (dofs, _) = self.space.element_dofs(k);
            for i in 0..basis.n {
                b[dofs[i]] -= wv * self.kappa2[k] * uc * basis.values[i];
            }
            Ok(())
        })?;
        let (matrix, rhs) = eliminate(&a, &b, &self.dirichlet);
        Ok(LinearSystem { matrix, rhs, dirichlet: self.dirichlet.clone() })
    }

    pub fn field(&self, values: Vec<f64>) -> Result<FieldVector> {
        FieldVector::new(self.space.clone(), values)
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.space.num_dofs() {
            return Err(Error::Dimension(format!(
                "iterate has {} entries, space has {} dofs",
                u.len(),
                self.space.num_dofs()
            )));
        }
        Ok(())
    }
}

/// Warns about atoms outside the solute or too close to the outer boundary.
fn check_atoms(space: &FeSpace, system: &MolecularSystem) -> Result<()> {
    let mesh = space.mesh();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in mesh.vertices() {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let c = system.center();
    let margin = (0..3).map(|d| (c[d] - lo[d]).min(hi[d] - c[d])).fold(f64::INFINITY, f64::min);
    if margin < 2.0 * system.extent() {
        log::warn!(
            "domain margin {margin:.3} is less than twice the molecular radius {:.3}",
            system.extent()
        );
    }
    for (i, a) in system.atoms().iter().enumerate() {
        match space.locate(&a.position) {
            Ok((k, _)) if mesh.regions()[k] == Region::Solvent => {
                log::warn!("atom {i} lies in a solvent element");
            }
            Ok(_) => {}
            Err(_) => return Err(Error::AtomOutsideMesh { atom: i, position: a.position }),
        }
    }
    Ok(())
}

/// Eliminated linearized RPBE system on `space`.
pub fn assemble_lrpbe(space: Arc<FeSpace>, system: &MolecularSystem, params: &PbeParameters) -> Result<LinearSystem> {
    RpbeOperator::new(space, system, params, Nonlinearity::Linear)?.linear_system()
}

/// Weak residual of the nonlinear RPBE at `u`.
pub fn rpbe_residual(u: &FieldVector, system: &MolecularSystem, params: &PbeParameters) -> Result<Vec<f64>> {
    RpbeOperator::new(u.space().clone(), system, params, Nonlinearity::Sinh)?.residual(u.values())
}

/// Jacobian of the nonlinear RPBE at `u`, fixed dofs eliminated.
pub fn rpbe_jacobian(u: &FieldVector, system: &MolecularSystem, params: &PbeParameters) -> Result<CsrMatrix> {
    RpbeOperator::new(u.space().clone(), system, params, Nonlinearity::Sinh)?.jacobian(u.values())
}
