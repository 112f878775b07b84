use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("solver failed: {msg} (last residual {residual:.3e})")]
    Solver { msg: String, residual: f64 },
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("unsupported topology: {0}")]
    Topology(String),
    #[error("degenerate boundary: {0}")]
    Degenerate(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("stagnation: {0}")]
    Stagnation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn solver(msg: impl Into<String>, residual: f64) -> Self {
        Error::Solver {
            msg: msg.into(),
            residual,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
