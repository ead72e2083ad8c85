use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("symbol of {name} is not finite at frequency ({xi1}, {xi2})")]
    NonFiniteSymbol { name: String, xi1: f64, xi2: f64 },
    #[error("field mean {mean:e} is not zero")]
    NonZeroMean { mean: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dyadic index {q} outside the resolved range 0..={q_max}")]
    BlockOutOfRange { q: i32, q_max: i32 },
    #[error("grid cannot resolve the request: {0}")]
    Unresolved(String),
    #[error("time step {dt} exceeds the stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("solution blew up at t = {t}: sup norm {sup:e}")]
    BlowUp { t: f64, sup: f64 },
    #[error("quadrature did not converge: value {value}, error estimate {estimate:e}")]
    Quadrature { value: f64, estimate: f64 },
    #[error("map displacement {displacement} exceeds the limit {limit}")]
    DisplacementTooLarge { displacement: f64, limit: f64 },
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
