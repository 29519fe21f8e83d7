use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty matrix")]
    EmptyMatrix,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("not subnormalized: norm {0:.12} exceeds 1")]
    NotSubnormalized(f64),

    #[error("eigenvalue {0:.12e} lies outside the domain of the function")]
    Domain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension cap exceeded: {qubits} qubits (max {max})")]
    DimensionCap { qubits: usize, max: usize },

    #[error("target accuracy {eta:.3e} unreachable at degree cap {cap}; best sup-error {achieved:.3e}")]
    DegreeCap { eta: f64, cap: usize, achieved: f64 },

    #[error("phase solver did not converge; residual {0:.3e}")]
    NoConvergence(f64),

    #[error("parity mismatch: {0}")]
    Parity(String),

    #[error("norm {norm:.12} exceeds 1 - delta = {limit:.12}")]
    GapViolated { norm: f64, limit: f64 },

    #[error("measured error {eps_measured:.6e} exceeds requested {eps_requested:.6e}")]
    EpsExceeded { eps_measured: f64, eps_requested: f64 },

    #[error("bound regime not satisfied (r = {0:.6e} > 1/2)")]
    BoundRegime(f64),

    #[error("no good component (amplitude {0:.3e})")]
    NoGoodComponent(f64),

    #[error("input is not a twisted embeddable unitary: {0}")]
    NotTwisted(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
