use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weight parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("dilation function appears unbounded at t = {t} (growth at grid boundary s = {s})")]
    UnboundedDilation { t: f64, s: f64 },

    #[error("index estimation failed: {0}")]
    IndexEstimation(String),

    #[error("admissibility undecidable: lower index {lower} ± {uncertainty} vs threshold {threshold}")]
    Indeterminate {
        lower: f64,
        uncertainty: f64,
        threshold: f64,
    },

    #[error("no fractional band: indices ({lower}, {upper}) do not fit n < lower <= upper < n+1")]
    NoBand { lower: f64, upper: f64 },

    #[error("insufficient samples: {found} grid points in ball, need {needed}")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("rank-deficient design: {0}")]
    Conditioning(String),

    #[error("iteration limit reached after {iterations} iterations (last residual {residual})")]
    IterationLimit {
        iterations: usize,
        residual: f64,
        last_coeffs: Vec<f64>,
    },

    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("jet extraction unstable for |alpha| = {order}: {message}")]
    ExtractionUnstable { order: usize, message: String },

    #[error("jet field incompatible: measured constant {measured} exceeds cap {cap}")]
    Incompatible { measured: f64, cap: f64 },

    #[error("experiment not applicable: {0}")]
    Inapplicable(String),

    #[error("invariant violated: {0}")]
    InvariantFailure(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
