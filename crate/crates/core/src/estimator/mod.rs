//! Solvation energy goal, dual solves and a posteriori error indicators.

mod dual;
mod goal;
mod indicators;

pub use dual::solve_dual;
pub use goal::{mollified_goal_vector, solvation_energy, BallQuadrature, GoalFunctional};
pub use indicators::{
    bubble_matrix, energy_product, erm_local_errors, FluxAverage, indicator_energy, indicator_goal_linear, indicator_goal_quadratic,
    parallelogram_product, residual_functional, IndicatorField, IndicatorKind, LocalErrors,
};
