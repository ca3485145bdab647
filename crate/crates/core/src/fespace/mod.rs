//! Lagrange finite element spaces on tetrahedral meshes.

mod assembly;
mod dirichlet;
mod field;
mod prolong;
pub mod quadrature;
mod space;
mod sparse;

pub use assembly::{assemble_operator, assemble_weighted, element_operator, Coefficients};
pub use dirichlet::{apply_dirichlet, dirichlet_data, eliminate, DirichletData};
pub use field::FieldVector;
pub use prolong::{composite_prolongation, p1_to_p2, prolongate_field, prolongation};
pub use space::{Degree, FeSpace, LocalBasis};
pub use sparse::CsrMatrix;
