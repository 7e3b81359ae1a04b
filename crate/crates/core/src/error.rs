use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A computation would exceed (or has exceeded) its configured work limit.
    /// This says nothing about the validity of the input.
    #[error("{what}: work {work} exceeds budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        work: String,
        budget: u64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    /// The prefix handed to a construction step is not a mu-sequence:
    /// `witness` is a nonzero kernel vector of norm below mu.
    #[error("prefix is not a mu-sequence: kernel vector {witness:?} has norm {norm}")]
    NotMuSequence { witness: Vec<String>, norm: String },

    #[error("no admissible term in [{lower}, {upper}] at step {step}")]
    IntervalExhausted {
        step: usize,
        lower: String,
        upper: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn budget(what: &'static str, work: impl ToString, budget: u64) -> Self {
        Error::BudgetExceeded {
            what,
            work: work.to_string(),
            budget,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
