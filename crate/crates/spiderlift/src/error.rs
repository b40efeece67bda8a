use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dynamic sectors are undefined: {0} is fixed by the multiplication map")]
    UndefinedDynamicSectors(String),
    #[error("symbol shift undefined at the cut point {0}")]
    UndefinedAtCut(String),
    #[error("{0} is not in the image of the lift")]
    NotInImage(String),
    #[error("invalid address: {0}")]
    InvalidAddress(String),
    #[error("degree {d} is below the minimal admissible degree {min}")]
    DegreeTooSmall { d: u32, min: u32 },
    #[error("invalid orbit portrait: {0}")]
    InvalidPortrait(String),
    #[error("internal address too short: {0}")]
    TooShort(String),
    #[error("degenerate configuration: the point carrying λ is zero")]
    DegenerateLambda,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
