use thiserror::Error;

/// Errors produced by parsing, fitting, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A data row failed to parse or violated a field invariant.
    /// `row` is the 1-based data row (header excluded).
    #[error("row {row}: {message}")]
    ParseRow { row: usize, message: String },

    /// The input stream itself is unusable (bad header, bad UTF-8, I/O).
    #[error("input: {0}")]
    ParseInput(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Scaling-law parameters violate their shape constraints.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("residuals are not finite at the initial parameters")]
    NonFiniteResiduals,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// The design matrix carries no usable information (e.g. all x identical).
    #[error("rank-deficient problem: {0}")]
    RankDeficient(String),

    #[error("fits are on different axes: {0} vs {1}")]
    AxisMismatch(String, String),

    #[error("covariance not available; attach it with inference::attach_covariance first")]
    MissingCovariance,

    #[error("degenerate split: {0}")]
    DegenerateSplit(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
