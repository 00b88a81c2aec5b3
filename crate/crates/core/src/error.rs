//! Error type shared by all library modules.

use thiserror::Error;

/// Errors produced by kernel evaluation, the linear-algebra core, model
/// fitting, data handling and hyperparameter scans.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible shapes (point dimension, vector length, matrix size).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A NaN or infinity reached a numerical routine.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A precondition on an argument failed (negative jitter, empty grid, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cholesky factorization failed; the matrix is not positive definite.
    /// Usually fixed by increasing the jitter delta.
    #[error("matrix is not positive definite ({0}); increase delta")]
    NotPositiveDefinite(String),

    /// A square or normal-equation system was numerically singular.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// Error reported by the LAPACK-backed routines.
    #[error("linear algebra backend: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),

    /// I/O failure while reading a dataset.
    #[error("io error for {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Dataset file violates the `x1,...,xD,f` CSV contract.
    #[error("malformed dataset {path}: {detail}")]
    MalformedDataset { path: String, detail: String },

    /// A feature column has zero variance and cannot be normalized.
    #[error("zero-variance feature column {column}")]
    ZeroVarianceColumn { column: String },

    /// Every trial of a hyperparameter scan failed.
    #[error("all {0} scan trials failed")]
    AllTrialsFailed(usize),

    /// An inner error with the operation that triggered it.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with the name of the failing operation.
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait ResultExt<T> {
    fn context(self, context: &str) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: &str) -> Result<T> {
        self.map_err(|e| e.with_context(context))
    }
}
