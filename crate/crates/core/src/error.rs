use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite state at step {index} of {label}")]
    NonFinite { label: String, index: usize },
    #[error("explosion guard tripped: |X| > {threshold} at step {index}")]
    Explosion { threshold: f64, index: usize },
    #[error("circulant embedding has negative eigenvalue mass {mass:.3e} (threshold {threshold:.1e}); use a larger embedding")]
    Embedding { mass: f64, threshold: f64 },
    #[error("singular diffusion matrix at observation {index}")]
    SingularDiffusion { index: usize },
    #[error("singular quadratic coefficient: {0}")]
    SingularInformation(String),
    #[error("point outside U_T: {0}")]
    OutsideDomain(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
