use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CfError {
    #[error("mode mismatch: {context}")]
    ModeMismatch { context: String },

    #[error("precision of {digits} digits is below the minimum of {min}")]
    Precision { digits: u32, min: u32 },

    #[error("cannot parse {text:?}: {reason}")]
    Parse { text: String, reason: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} requires complex-float mode")]
    NeedsComplex(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("source has {len} terms, index {index} requested")]
    SourceExhausted { index: usize, len: usize },

    #[error("zero denominator at index {index}")]
    ZeroDenominator { index: usize },

    #[error("contraction undefined: b_{index} = 0")]
    ContractionUndefined { index: usize },

    #[error("scaling factor r({index}) is zero")]
    ZeroScale { index: usize },

    #[error("source shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("consecutive values at indices {index} and {} are equal", index - 1)]
    EqualConsecutive { index: usize },

    #[error("term a_{index} is zero")]
    ZeroTerm { index: usize },

    #[error("trailing zero denominator at index {index} has no successor to merge")]
    TrailingZero { index: usize },

    #[error("partial numerator a_{index} is not 1")]
    NotUnitNumerators { index: usize },

    #[error("partial denominator b_{index} is not 1")]
    NotUnitDenominators { index: usize },

    #[error("both canonical numerator and denominator vanish at index {index}")]
    Degenerate { index: usize },

    #[error("parameter predicate violated: {0}")]
    Predicate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("every approximant up to depth {depth} is at infinity")]
    AllInfinite { depth: usize },

    #[error("parameters outside the covered regime: {0}")]
    Regime(String),

    #[error("invalid input at {pointer}: {message}")]
    Json { pointer: String, message: String },
}

impl CfError {
    pub fn json(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        CfError::Json { pointer: pointer.into(), message: message.into() }
    }

    /// Prefixes the JSON pointer of a nested error with `prefix`.
    pub fn under(self, prefix: &str) -> Self {
        match self {
            CfError::Json { pointer, message } => CfError::Json { pointer: format!("{prefix}{pointer}"), message },
            other => CfError::Json { pointer: prefix.to_string(), message: other.to_string() },
        }
    }
}
