//! Crate-wide structured errors with machine-readable codes.

use crate::field::FieldError;
use crate::polyfun::ParseError;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineError {
    Field(FieldError),
    Parse(ParseError),
    /// Evaluation degree beyond the configured cap.
    DegreeCap { expr: String, degree: u64, cap: u64 },
    /// Inner rank of a composition beyond the configured cap.
    RankCap { needed: usize, cap: usize },
    /// A single weight block exceeded the configured column cap.
    BlockCap { weight: String, cols: usize, cap: usize },
    /// A truncated-category object space exceeded the configured cap.
    ObjectCap { object: usize, dim: usize, cap: usize },
    /// Tried to materialize a contravariant functor as a left module.
    Contravariant { expr: String },
    /// Oracle asked to grade an expression outside the supported fragment.
    UnsupportedFragment { expr: String, reason: String },
    ShapeMismatch { detail: String },
    UnknownName { name: String },
    /// A theorem-covered instance failed its predicted verdict.
    TheoremContradiction { detail: String },
    Io(String),
    InvalidJob { detail: String },
    CacheCorrupt { detail: String },
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::Field(_) => "E_FIELD",
            EngineError::Parse(_) => "E_PARSE",
            EngineError::DegreeCap { .. } => "E_DEGREE_CAP",
            EngineError::RankCap { .. } => "E_RANK_CAP",
            EngineError::BlockCap { .. } => "E_BLOCK_CAP",
            EngineError::ObjectCap { .. } => "E_OBJECT_CAP",
            EngineError::Contravariant { .. } => "E_CONTRAVARIANT",
            EngineError::UnsupportedFragment { .. } => "E_UNSUPPORTED_FRAGMENT",
            EngineError::ShapeMismatch { .. } => "E_SHAPE",
            EngineError::UnknownName { .. } => "E_UNKNOWN_NAME",
            EngineError::TheoremContradiction { .. } => "E_THEOREM_CONTRADICTION",
            EngineError::Io(_) => "E_IO",
            EngineError::InvalidJob { .. } => "E_INVALID_JOB",
            EngineError::CacheCorrupt { .. } => "E_CACHE_CORRUPT",
        }
    }
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Field(e) => write!(f, "field error: {e}"),
            EngineError::Parse(e) => write!(f, "{e}"),
            EngineError::DegreeCap { expr, degree, cap } => {
                write!(f, "degree {degree} of {expr} exceeds cap {cap}")
            }
            EngineError::RankCap { needed, cap } => {
                write!(f, "inner rank {needed} exceeds cap {cap}")
            }
            EngineError::BlockCap { weight, cols, cap } => {
                write!(f, "weight block {weight} needs {cols} columns, cap {cap}")
            }
            EngineError::ObjectCap { object, dim, cap } => {
                write!(f, "object {object} needs dimension {dim}, cap {cap}")
            }
            EngineError::Contravariant { expr } => {
                write!(f, "{expr} is contravariant; only the Tor duality path consumes it")
            }
            EngineError::UnsupportedFragment { expr, reason } => {
                write!(f, "unsupported fragment {expr}: {reason}")
            }
            EngineError::ShapeMismatch { detail } => write!(f, "shape mismatch: {detail}"),
            EngineError::UnknownName { name } => write!(f, "unknown structure map '{name}'"),
            EngineError::TheoremContradiction { detail } => {
                write!(f, "theorem-contradiction verdict: {detail}")
            }
            EngineError::Io(e) => write!(f, "io error: {e}"),
            EngineError::InvalidJob { detail } => write!(f, "invalid job: {detail}"),
            EngineError::CacheCorrupt { detail } => write!(f, "cache corrupt: {detail}"),
        }
    }
}

impl std::error::Error for EngineError {}

impl From<FieldError> for EngineError {
    fn from(e: FieldError) -> Self {
        EngineError::Field(e)
    }
}

impl From<ParseError> for EngineError {
    fn from(e: ParseError) -> Self {
        EngineError::Parse(e)
    }
}

impl From<std::io::Error> for EngineError {
    fn from(e: std::io::Error) -> Self {
        EngineError::Io(e.to_string())
    }
}
