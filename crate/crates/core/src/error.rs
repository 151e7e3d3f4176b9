use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("singular system: {0}")]
    Singular(String),

    /// The half-space truncation is too short for the exponential decay of the datum.
    #[error("grid too short: L*|xi'| = {0} < 20")]
    Adequacy(f64),

    #[error("boundary data does not vanish at the window edge (|value| = {0:e})")]
    Support(f64),

    /// A numerical diagnostic failed (e.g. a kernel integral with a non-negligible imaginary part).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
