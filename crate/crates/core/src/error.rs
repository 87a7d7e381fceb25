use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("field length {got} does not match grid ({expected})")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dyadic block {j} outside resolvable range [{min}, {max}]")]
    BlockOutOfRange { j: i32, min: i32, max: i32 },
    #[error("density {min_rho:e} at or below floor {floor:e} at t = {t}")]
    Positivity { t: f64, min_rho: f64, floor: f64 },
    #[error("non-finite value encountered at t = {t}")]
    Blowup { t: f64 },
    #[error("pulse too wide for the box: boundary tail {tail:e} exceeds {limit:e}")]
    PulseTooWide { tail: f64, limit: f64 },
    #[error("quadrature did not converge: {0}")]
    Unconverged(String),
    #[error("fit rejected: {0}")]
    Fit(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
