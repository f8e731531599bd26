//! Error type shared across the crate.

/// Errors produced by model construction, estimation, inference and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// The linear predictor recursion produced a non-finite value.
    #[error("non-finite linear predictor at index {index}")]
    NonFinitePredictor { index: usize },

    /// Too few observations for the requested operation.
    #[error("{what}: need at least {needed} observations, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// The observed information matrix could not be factorized.
    #[error("observed information matrix is not positive definite")]
    SingularInformation,

    /// The Wald sub-block of the inverse information is singular.
    #[error("singular covariance sub-block in Wald statistic")]
    SingularSubBlock,

    /// Inference was requested on a fit that did not converge.
    #[error("fit did not converge; refusing to run inference")]
    NotConverged,

    /// Standard errors are unavailable (singular information at the optimum).
    #[error("standard errors unavailable for this fit")]
    MissingStdErr,

    /// A degenerate series made a statistic undefined.
    #[error("degenerate series: {0}")]
    DegenerateSeries(&'static str),

    /// Future covariate rows are missing for the forecast horizon.
    #[error("forecast needs {needed} future covariate rows, got {got}")]
    MissingFutureCovariates { needed: usize, got: usize },

    /// A data file failed validation.
    #[error("ingestion error at row {row}: {message}")]
    Ingest { row: usize, message: String },

    /// Underlying CSV reader failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Filesystem failure while reading data.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
