use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("index ({i}, {j}) out of range for n = {n}")]
    Index { i: usize, j: usize, n: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("power iteration did not converge after {iterations} iterations (best estimate {best_estimate})")]
    Convergence { iterations: usize, best_estimate: f64 },

    #[error("imaginary residual {residual:e} exceeds tolerance relative to scale {scale:e}")]
    ImaginaryResidual { residual: f64, scale: f64 },

    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),

    #[error("no in-scope closed form for {0}")]
    UnsupportedLimit(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short tag used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid-dimension",
            Error::Index { .. } => "index",
            Error::Shape { .. } => "shape",
            Error::Resource(_) => "resource",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Convergence { .. } => "convergence",
            Error::ImaginaryResidual { .. } => "imaginary-residual",
            Error::DegenerateStatistics(_) => "degenerate-statistics",
            Error::UnsupportedLimit(_) => "unsupported-limit",
            Error::Usage(_) => "usage",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
