//! Adaptive finite element solver for the regularized Poisson-Boltzmann
//! equation (RPBE).
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] - conforming tetrahedral meshes, longest-edge bisection
//!   hierarchies and the node sets smoothed by local multilevel methods.
//! * [`fespace`] - P1/P2 Lagrange spaces, quadrature, sparse assembly,
//!   prolongation and Dirichlet elimination.
//! * [`problem`] - molecular input, the Coulomb splitting, the linear RPBE
//!   system and an inexact Newton solver for the nonlinear RPBE.
//! * [`estimator`] - the solvation free energy goal, dual solves and the
//!   energy, goal-quadratic and goal-linear (element residual) indicators.
//! * [`adapt`] - marking strategies and the solve/estimate/mark/refine loop.
//! * [`mlsolve`] - preconditioned CG with local multigrid V-cycles and
//!   additive BPX/HB preconditioners.
//! * [`vtk`] - legacy VTK export.

pub mod adapt;
pub mod error;
pub mod estimator;
pub mod fespace;
pub(crate) mod geom;
pub mod mesh;
pub mod mlsolve;
pub mod problem;
pub mod vtk;

pub use error::{Error, Result};

/// Cartesian point or vector in three dimensions.
pub type Point = [f64; 3];
