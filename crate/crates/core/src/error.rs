use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("degenerate element {element}: signed volume {volume:e}")]
    DegenerateElement { element: usize, volume: f64 },

    #[error("nothing to refine")]
    NothingToRefine,

    #[error("invalid element id {id} (mesh has {count} elements)")]
    InvalidElement { id: usize, count: usize },

    #[error("invalid level {level} (hierarchy has levels 0..={finest})")]
    InvalidLevel { level: usize, finest: usize },

    #[error("coarsest level has no smoothing set; it is solved directly")]
    CoarsestLevel,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no atoms")]
    NoAtoms,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point {point:?} lies within {tol:e} of charge center {atom}")]
    SingularPoint { point: [f64; 3], atom: usize, tol: f64 },

    #[error("point {0:?} is outside the mesh")]
    PointOutsideMesh([f64; 3]),

    #[error("atom {atom} at {position:?} is outside the mesh")]
    AtomOutsideMesh { atom: usize, position: [f64; 3] },

    #[error("mollifier ball of radius {sigma} around atom {atom} is not contained in the mesh")]
    BallOutsideMesh { atom: usize, sigma: f64 },

    #[error("mollification radius {sigma} for atom {atom} reaches the dielectric interface (distance {distance})")]
    MollifierTooWide { atom: usize, sigma: f64, distance: f64 },

    #[error("sinh argument {value:e} overflows; damp the Newton update or improve the initial guess")]
    Overflow { value: f64 },

    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("matrix is not symmetric positive definite (breakdown at iteration {iteration})")]
    NotSpd { iteration: usize },

    #[error("PCG did not converge in {max_iter} iterations (final relative residual {:e})", history.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { max_iter: usize, history: Vec<f64> },

    #[error("Newton did not converge in {max_iter} iterations (residual history {history:?})")]
    NewtonNoConvergence { max_iter: usize, history: Vec<f64> },

    #[error("estimator identically zero")]
    ZeroEstimator,

    #[error("singular local system on element {0}")]
    SingularLocal(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
