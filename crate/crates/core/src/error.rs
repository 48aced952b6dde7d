//! Error type shared by the whole crate.

use std::fmt;

/// Everything that can go wrong short of a verification *verdict* (invalid designs
/// are reported through `VerificationReport`, not through this type).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two values that must live over the same `Z_m × Z_n` do not.
    AmbientMismatch {
        expected: (u32, u32),
        found: (u32, u32),
    },
    /// A parameter violates a precondition (divisibility, parity, range, ...).
    Parameter(String),
    /// A design file failed to parse; the string names the offending path.
    Parse(String),
    /// An exhaustive scan was refused because the point count exceeds the ceiling.
    TooLarge {
        points: u64,
        ceiling: u64,
    },
    /// A construction hypothesis does not hold for the given input.
    Hypothesis(String),
    /// A construction's input or output failed verification; carries the stage name.
    FailedVerification {
        stage: String,
        summary: String,
    },
    /// A named ingredient slot is missing or unusable.
    Ingredient(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::AmbientMismatch { expected, found } => write!(
                f,
                "ambient mismatch: expected Z_{}xZ_{}, found Z_{}xZ_{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::TooLarge { points, ceiling } => write!(
                f,
                "refusing exhaustive scan over {points} points (ceiling {ceiling})"
            ),
            Error::Hypothesis(msg) => write!(f, "hypothesis not satisfied: {msg}"),
            Error::FailedVerification { stage, summary } => {
                write!(f, "verification failed at stage `{stage}`: {summary}")
            }
            Error::Ingredient(msg) => write!(f, "ingredient error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
