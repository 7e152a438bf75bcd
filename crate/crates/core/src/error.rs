use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("quadrature did not converge: estimate {estimate:e}, achieved error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("singular weight at sample index {index}")]
    SingularWeight { index: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),

    #[error("accumulator overflow")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
