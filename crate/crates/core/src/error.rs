use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis label {0} is not in the index set")]
    UnknownLabel(i64),

    #[error("parameter {value} outside the basis domain [{lo}, {hi})")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is numerically rank-deficient (smallest singular value {sigma_min:.3e}, largest {sigma_max:.3e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    #[error("combinatorial guard exceeded: {supports} supports would be scanned (limit {limit})")]
    CombinatorialGuard { supports: u128, limit: u128 },

    #[error("sampling matrix restricted to the support is numerically singular (smallest singular value {sigma_min:.3e}); increase the number of sampled parameter points")]
    SingularSupportMatrix { sigma_min: f64 },

    #[error("dense simulation limit exceeded: requested {requested}, limit {limit}")]
    DenseLimit { requested: usize, limit: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("numerical guarantee not met: {0}")]
    GuaranteeFailed(String),

    #[error("projectors are not orthogonal (overlap norm {0:.3e})")]
    NotOrthogonal(f64),

    #[error("protocol '{0}' is a declared interface stub and has no implementation")]
    ProtocolStub(&'static str),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
