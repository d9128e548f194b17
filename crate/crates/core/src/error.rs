use thiserror::Error;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("moment m_{requested} requested but the sequence stops at m_{horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },

    #[error("moment sequence is empty")]
    EmptyMoments,

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: &'static str },

    #[error("invalid tolerance {name} = {value} (must lie in (0, 1))")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error(
        "Hankel pattern computed up to index {computed} but degree {degree} needs index {needed}"
    )]
    InsufficientPattern {
        degree: usize,
        needed: usize,
        computed: usize,
    },

    #[error("coefficient system for p_{degree} is numerically singular (condition estimate {condition:e})")]
    SingularAlphaSystem { degree: usize, condition: f64 },

    #[error("functional is not quasi-definite: Delta_{index} vanishes")]
    NotQuasiDefinite { index: usize },

    #[error("degree {degree} is not regular (Delta_{} vanishes); nearest regular degrees: {below:?} / {above:?}", .degree.saturating_sub(1))]
    NotRegularDegree {
        degree: usize,
        below: Option<usize>,
        above: Option<usize>,
    },

    #[error(
        "confluent Vandermonde solve failed its residual check (relative residual {residual:e})"
    )]
    IllConditionedWeights { residual: f64 },

    #[error("initial coupling w*v vanishes (|w*v| = {coupling:e})")]
    ZeroInitialCoupling { coupling: f64 },

    #[error("starting vector {which} is zero")]
    ZeroStartVector { which: &'static str },

    #[error("no regular degree within the computed pattern realizes m_0..m_{k}")]
    NoRealizableDegree { k: usize },

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,
}

pub type Result<T> = core::result::Result<T, Error>;
