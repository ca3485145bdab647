//! Molecular input, physical parameters and the discrete regularized
//! Poisson-Boltzmann problem.
//!
//! The full potential is split as `u = u_r + u_c`, with `u_c` the Coulomb
//! potential of the fixed charges in a uniform solute dielectric. The
//! unknown is the reaction potential `u_r`, which solves
//!
//! ```text
//! (eps grad u_r, grad v) + (kappa2 sinh(u_r + u_c), v) = -((eps - eps_m) grad u_c, grad v)
//! ```
//!
//! with `kappa2 = 0` in the solute.

mod coulomb;
mod molecule;
mod newton;
mod params;
mod rpbe;

pub use coulomb::{coulomb, coulomb_value, screened_boundary_value};
pub use molecule::{parse_pqr, Atom, MolecularSystem};
pub use newton::{newton_solve, LinearSolver, NewtonConfig, NewtonReport};
pub use params::{
    coulomb_constant, kbt_kcal_per_mol, BcKind, PbeParameters, DEFAULT_COULOMB_CONSTANT,
    DEFAULT_TEMPERATURE,
};
pub use rpbe::{assemble_lrpbe, rpbe_jacobian, rpbe_residual, LinearSystem, Nonlinearity, RpbeOperator};
