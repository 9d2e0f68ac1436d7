use std::io;

use thiserror::Error;

use crate::fraction::Fraction;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("unbalanced trace: return without an open call at event {event}")]
    UnbalancedTrace { event: usize },

    #[error("invalid threshold: phi ({phi}) must exceed epsilon ({epsilon})")]
    InvalidThreshold { phi: Fraction, epsilon: Fraction },

    #[error("find-min on an empty monitor pool")]
    EmptyPool,

    #[error("trace contains no calls")]
    EmptyTrace,

    #[error("mismatched runs: exact tree saw {exact} calls, streaming report saw {streaming}")]
    MismatchedRun { exact: u64, streaming: u64 },

    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),

    #[error("invalid fraction {input:?}: {reason}")]
    InvalidFraction { input: String, reason: &'static str },

    #[error(transparent)]
    Io(#[from] io::Error),
}
