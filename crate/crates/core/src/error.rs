use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("candidate {candidate} is missing the `{field}` score required by regularizer `{regularizer}`")]
    MissingScore {
        candidate: usize,
        regularizer: &'static str,
        field: String,
    },

    #[error("utility matrix is {available_n}x{available_l} but {n}x{l} was requested")]
    Dimension {
        n: usize,
        l: usize,
        available_n: usize,
        available_l: usize,
    },

    #[error("{kind} error scoring pair (hyp {row}, pseudo-ref {col}): {message}")]
    Utility {
        row: usize,
        col: usize,
        kind: UtilityErrorKind,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityErrorKind {
    /// The channel to an external scorer failed (I/O, timeout, protocol).
    Transport,
    /// The scorer answered with an error for this pair.
    Scoring,
    /// A value that is not a finite real was produced.
    NonFinite,
}

impl core::fmt::Display for UtilityErrorKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            UtilityErrorKind::Transport => "transport",
            UtilityErrorKind::Scoring => "scoring",
            UtilityErrorKind::NonFinite => "non-finite",
        })
    }
}

/// Failure reported by a [`Utility`](crate::Utility) for one entry of a batch.
///
/// `pair` is the position inside the batch handed to `score_pairs`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityError {
    pub pair: usize,
    pub kind: UtilityErrorKind,
    pub message: String,
}

impl UtilityError {
    pub fn transport(pair: usize, message: impl Into<String>) -> Self {
        UtilityError { pair, kind: UtilityErrorKind::Transport, message: message.into() }
    }

    pub fn scoring(pair: usize, message: impl Into<String>) -> Self {
        UtilityError { pair, kind: UtilityErrorKind::Scoring, message: message.into() }
    }
}

impl core::fmt::Display for UtilityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} error at pair {}: {}", self.kind, self.pair, self.message)
    }
}

impl core::error::Error for UtilityError {}
