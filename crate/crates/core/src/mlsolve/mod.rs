//! Preconditioned conjugate gradients with local multilevel
//! preconditioners.
//!
//! Levels are indexed `0..=J` with `0` the coarsest. All level operators
//! are the Dirichlet-eliminated matrices (identity rows and columns on
//! fixed dofs); prolongations are masked so they never touch fixed dofs.

mod coarse;
mod complexity;
mod pcg;
mod smoother;
mod stack;

pub use coarse::CoarseSolver;
pub use complexity::{complexity_report, ComplexityReport, ComplexityRow};
pub use pcg::{pcg, Identity, PcgResult, Preconditioner};
pub use smoother::sgs_smooth;
pub use stack::{
    additive_apply, mg_vcycle, LevelStack, MultilevelPreconditioner, MultilevelSolver,
    PreconditionerConfig, PreconditionerVariant, SolverConfig,
};
