use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Every variant maps onto one of the stable process exit codes through
/// [`Error::exit_code`]: 1 for bad input, 2 for numerical failure and 3 for
/// a violated internal invariant.
#[derive(Error, Debug)]
pub enum Error {
    #[error("collision between bodies {i} and {j} (distance {distance:e}, diameter {diameter:e})")]
    Collision {
        i: usize,
        j: usize,
        distance: f64,
        diameter: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid masses: {0}")]
    InvalidMasses(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no convergence after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("iterate approached the collision set at iteration {iter} (min/diameter ratio {ratio:e})")]
    CollisionApproach { iter: usize, ratio: f64 },
    #[error("frame mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("Gram-Schmidt breakdown: {found} of {needed} columns constructed")]
    GramSchmidtBreakdown { found: usize, needed: usize },
    #[error("invariance violated for {what}: residual {residual:e} exceeds {bound:e}")]
    InvarianceViolation {
        what: String,
        residual: f64,
        bound: f64,
    },
    #[error("ambiguous inertia: eigenvalue {value:e} within tolerance {tol:e} of zero")]
    AmbiguousInertia { value: f64, tol: f64 },
    #[error("unresolved eigenvalue cluster near {at}: separation {separation:e} below resolution {resolution:e}")]
    ClusterError {
        at: String,
        separation: f64,
        resolution: f64,
    },
    #[error("rank decision ambiguous: singular value {value:e} within a factor 10 of threshold {threshold:e}")]
    RankAmbiguity { value: f64, threshold: f64 },
    #[error("operator is not self-adjoint (asymmetry {0:e})")]
    NotSelfAdjoint(f64),
    #[error("eigen-solver failed: {0}")]
    EigenFailure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Collision { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidMasses(_)
            | Error::Input(_)
            | Error::ModeMismatch(_)
            | Error::NotSelfAdjoint(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 1,
            Error::NoConvergence { .. }
            | Error::CollisionApproach { .. }
            | Error::AmbiguousInertia { .. }
            | Error::ClusterError { .. }
            | Error::RankAmbiguity { .. }
            | Error::EigenFailure(_)
            | Error::GramSchmidtBreakdown { .. }
            | Error::DegenerateBasis(_) => 2,
            Error::InvarianceViolation { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
