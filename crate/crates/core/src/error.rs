use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular model: discriminant is zero ({0})")]
    Singular(String),

    #[error("malformed curve configuration: {0}")]
    Config(String),

    #[error("p = {p} is a bad or unsupported prime for the good-reduction path; use the bad-prime rule")]
    BadPrime { p: u64 },

    #[error("additive reduction at p = {p}: a_p = 0, no split/nonsplit classification")]
    AdditiveReduction { p: u64 },

    #[error("coefficient provider cannot supply a_p for p = {p} (first missing prime)")]
    MissingPrime { p: u64 },

    #[error("eta quotient not supported: {0}")]
    UnsupportedEta(String),

    #[error("discriminant d = {d} not supported: {reason}")]
    UnsupportedDiscriminant { d: i64, reason: String },

    #[error("coefficient table too short: {required} terms needed, {available} available")]
    InsufficientTerms { required: usize, available: usize },

    #[error("sign inference ambiguous (residuals +1: {plus:.3e}, -1: {minus:.3e}); extend the table")]
    AmbiguousSign { plus: f64, minus: f64 },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is not on the curve")]
    NotOnCurve,

    #[error("numeric overflow: {0}")]
    Overflow(String),
}
