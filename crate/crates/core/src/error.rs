use std::io;

use thiserror::Error;

/// Contract and parameter errors. Alignment failures are not errors; see
/// [`crate::align::AlignFailure`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("label {label} out of range ({kind} labels span {lo}..={hi})")]
    LabelOutOfRange {
        kind: &'static str,
        label: u64,
        lo: u64,
        hi: u64,
    },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
