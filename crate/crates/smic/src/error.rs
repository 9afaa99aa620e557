use thiserror::Error;

/// Errors produced by dataset handling, kernel construction, the solvers,
/// and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} has zero variance (constant column)")]
    ZeroVariance(usize),

    #[error("invalid class priors: {0}")]
    InvalidPrior(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("local scale is zero at sample {0} (duplicate points within the neighborhood)")]
    DegenerateScale(usize),

    #[error("neighbor count t={t} outside the valid range [1, {max}]")]
    InvalidT { t: usize, max: usize },

    #[error("Gaussian width must be positive and finite, got {0}")]
    InvalidGamma(f64),

    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("linear system for class {0} is not positive definite")]
    SingularSystem(usize),

    #[error("hold-out fold is empty")]
    EmptyFold,

    #[error("could not draw folds with every class present in every training split")]
    InfeasibleFolds,

    #[error("labelings have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),

    #[error("eigenvalue for cluster {cluster} is not positive ({value})")]
    ZeroEigenvalue { cluster: usize, value: f64 },

    #[error("every kernel parameter candidate failed; first failure: {0}")]
    AllCandidatesFailed(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
