//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("degree mismatch: {detail}")]
    DegreeMismatch { detail: String },

    #[error("slot index out of range: {detail}")]
    SlotOutOfRange { detail: String },

    #[error("repeated slot in contraction set: {detail}")]
    RepeatedSlot { detail: String },

    #[error("unknown generator label: {detail}")]
    UnknownGenerator { detail: String },

    #[error("subspace is not stable under generator {generator}")]
    NotStable { generator: String },

    #[error("problem size {cells} exceeds budget {budget}; use the diagram span instead")]
    BudgetExceeded { cells: usize, budget: usize },

    #[error("out of stable range: {detail}")]
    OutOfStableRange { detail: String },

    #[error("input is a scalar matrix; no diagonalizing triple exists")]
    ScalarInput,

    #[error("zero vector has no non-invariance witness")]
    ZeroVector,

    #[error("matrix block violates the required symmetry: {detail}")]
    SymmetryViolation { detail: String },

    #[error("invalid argument: {detail}")]
    InvalidArgument { detail: String },

    #[error("parse error: {detail}")]
    Parse { detail: String },
}

impl Error {
    pub(crate) fn parse(detail: impl Into<String>) -> Self {
        Error::Parse {
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(detail: impl Into<String>) -> Self {
        Error::InvalidArgument {
            detail: detail.into(),
        }
    }
}
