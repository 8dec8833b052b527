use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("root of unity factor is not rational; use the approximate field")]
    NonRationalUnit,
    #[error("no exact rational root: {0}")]
    NoExactRoot(String),
    #[error("invalid field configuration: {0}")]
    InvalidConfig(String),
    #[error("root of zero requested")]
    ZeroRoot,
    #[error("series has no leading term")]
    ZeroLeading,
    #[error("variable mismatch: {0} vs {1}")]
    VarMismatch(String, String),
    #[error("result is an infinite series; supply a truncation")]
    NeedsTruncation,
    #[error("composition diverges: inner series must have positive order")]
    DivergentComposition,
    #[error("reversion failed: {0}")]
    RevertFailed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("object is not supported at the requested point: {0}")]
    UnsupportedPoint(String),
    #[error("ramification mismatch: {0} vs {1}")]
    RamMismatch(i64, i64),
    #[error("operator kind does not match object kind")]
    KindMismatch,
    #[error("connection has horizontal sections")]
    HorizontalSection,
    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),
    #[error("slope is not positive: {0}")]
    SlopeNotPositive(String),
    #[error("g is not in the domain of the inverse transform: {0}")]
    NotInDomain(String),
    #[error("leading band entry vanishes at column {0}")]
    SingularLeading(i64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("mixed variables: {0} and {1}")]
    MixedVariables(String, String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. } | Error::MixedVariables(..) => 2,
            _ => 1,
        }
    }
}
