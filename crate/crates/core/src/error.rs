use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive-definite")]
    NonSpd,

    #[error("matrix is indefinite (smallest eigenvalue {0:.3e})")]
    IndefiniteMatrix(f64),

    #[error("singular value decomposition did not converge")]
    NoConvergence,

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("profile matrix has rank {rank}, fewer than the requested K = {k}")]
    RankDeficient { rank: usize, k: usize },

    #[error("projected profiles are degenerate (trace of square root {0:.3e})")]
    DegenerateProjection(f64),

    #[error("projection matrix is numerically singular")]
    SingularProjection,

    #[error("invalid profile set: {0}")]
    InvalidProfiles(String),

    #[error("empty context set")]
    EmptyContext,

    #[error("mean-regularized policy requires a mean profile")]
    MissingMeanProfile,

    #[error("reshape policy requires a hierarchy with a reshaping transform")]
    MissingReshape,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("plot rendering failed: {0}")]
    Plot(String),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
