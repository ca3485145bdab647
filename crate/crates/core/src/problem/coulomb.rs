use super::{MolecularSystem, PbeParameters};
use crate::{geom, Error, Point, Result};

const SINGULAR_TOL: f64 = 1e-12;

/// `u_c(x) = (C / eps_m) sum_i q_i / |x - x_i|` and its gradient.
pub fn coulomb(system: &MolecularSystem, params: &PbeParameters, x: &Point) -> Result<(f64, Point)> {
    let s = params.coulomb / params.eps_m;
    let mut value = 0.0;
    let mut grad = [0.0; 3];
    for (i, a) in system.atoms().iter().enumerate() {
        let d = geom::sub(x, &a.position);
        let r = geom::norm(&d);
        if r < SINGULAR_TOL {
            return Err(Error::SingularPoint { point: *x, atom: i, tol: SINGULAR_TOL });
        }
        value += a.charge / r;
        grad = geom::add(&grad, &geom::scale(&d, -a.charge / (r * r * r)));
    }
    Ok((s * value, geom::scale(&grad, s)))
}

/// Value of `u_c` only.
pub fn coulomb_value(system: &MolecularSystem, params: &PbeParameters, x: &Point) -> Result<f64> {
    coulomb(system, params, x).map(|(v, _)| v)
}

/// Boundary data for `u_r`: the screened solvent potential of the charges,
/// `(C / eps_s) sum_i q_i exp(-k' r_i) / r_i` with `k' = kappa_s / sqrt(eps_s)`,
/// minus `u_c`.
pub fn screened_boundary_value(system: &MolecularSystem, params: &PbeParameters, x: &Point) -> Result<f64> {
    let k = params.screening_length_inv();
    let mut screened = 0.0;
    for (i, a) in system.atoms().iter().enumerate() {
        let r = geom::norm(&geom::sub(x, &a.position));
        if r < SINGULAR_TOL {
            return Err(Error::SingularPoint { point: *x, atom: i, tol: SINGULAR_TOL });
        }
        screened += a.charge * (-k * r).exp() / r;
    }
    Ok(params.coulomb / params.eps_s * screened - coulomb_value(system, params, x)?)
}
