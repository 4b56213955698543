use thiserror::Error;

/// Errors raised by the energy and cell-problem routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("inadmissible kernel: {0}")]
    InadmissibleKernel(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("infeasible topology: {0}")]
    InfeasibleTopology(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("out of span: {0}")]
    OutOfSpan(String),

    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("grid too large for direct summation: M = {0} (limit 128)")]
    DeskScale(usize),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InadmissibleKernel(_) | Error::NoConvergence(_) | Error::InfeasibleTopology(_)
        )
    }
}
