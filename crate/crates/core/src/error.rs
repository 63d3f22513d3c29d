use thiserror::Error;

use crate::partition::CertificationError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("shift of {shift} points exceeds the domain ({points} points)")]
    ShiftOutOfRange { shift: i64, points: usize },

    #[error("window [{a}, {b}] is not a grid-aligned sub-interval of the domain")]
    BadWindow { a: f64, b: f64 },

    #[error("lipschitz ratio undefined: the two inputs coincide")]
    IdenticalInputs,

    #[error(transparent)]
    Certification(#[from] CertificationError),

    #[error("csv parse error on line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
