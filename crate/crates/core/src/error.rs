use thiserror::Error;

/// Errors produced by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value outside the domain of a formula, e.g. a zero channel gain.
    #[error("domain error at index {index}: {reason}")]
    Domain { index: usize, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The effective power is too small for the constellation to hold
    /// more than the zero point.
    #[error("infeasible power: P_tilde = {p_tilde} < 1 gives Q = 0")]
    InfeasiblePower { p_tilde: f64 },

    /// An enumeration or search would exceed its configured cap.
    #[error("size cap exceeded: {what} requires {required}, cap is {cap}")]
    Size {
        what: &'static str,
        required: f64,
        cap: f64,
    },

    #[error("minimum distance undefined for a constellation with {points} point(s)")]
    UndefinedDistance { points: usize },

    #[error("{0} is not a point of the received constellation")]
    NotInConstellation(f64),

    /// Property Gamma does not hold (or could not be certified), so a
    /// received point has no unique decomposition.
    #[error("received constellation is not uniquely decomposable ({0})")]
    Ambiguous(String),

    #[error("message index {index} out of range for {bins} bins")]
    Message { index: usize, bins: usize },

    #[error("rate infeasible: {requested} sequences requested, at most {max} supported")]
    RateInfeasible { requested: u128, max: u128 },

    #[error("probability table not normalized: {0}")]
    Normalization(String),

    #[error("least-squares fit is degenerate: {0}")]
    Fit(String),

    #[error("too few samples: got {got}, need at least {need}")]
    SampleSize { got: usize, need: usize },

    #[error("parse error: {0}")]
    Parse(String),

    /// A failure while processing one point of a power grid.
    #[error("at P = {p}: {source}")]
    AtPower { p: f64, source: Box<Error> },
}

impl Error {
    /// True for failures caused by a computational cap rather than by
    /// invalid input.
    pub fn is_cap(&self) -> bool {
        match self {
            Error::Size { .. } | Error::RateInfeasible { .. } => true,
            Error::AtPower { source, .. } => source.is_cap(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
