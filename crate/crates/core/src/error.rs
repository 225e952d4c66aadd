use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by dataset ingestion and the solver entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column} ({name}): cannot parse {value:?} as a finite number")]
    NonNumeric {
        /// 1-based data row (the header is row 0).
        row: usize,
        /// 1-based column.
        column: usize,
        name: String,
        value: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },

    #[error("response column {0:?} not found")]
    MissingResponse(String),

    #[error("dataset needs at least 2 rows, found {0}")]
    TooFewRows(usize),

    #[error("dataset needs at least 1 predictor column")]
    NoPredictors,

    #[error("{found} predictors exceeds the supported maximum of {max}")]
    TooManyPredictors { found: usize, max: usize },

    #[error("dataset is already standardized")]
    AlreadyStandardized,

    #[error("response column is constant; selection is degenerate")]
    ConstantResponse,

    #[error("non-finite inner product while building the Gram system")]
    Overflow,

    #[error("exhaustive enumeration over {p} predictors exceeds the cap of {cap}")]
    EnumerationCap { p: usize, cap: usize },

    #[error("cardinality {k} outside 0..={p}")]
    CardinalityOutOfRange { k: usize, p: usize },

    #[error("variable {0} is not free at this node")]
    NotFree(usize),

    #[error("node has no free variables")]
    NoFreeVariables,

    #[error("upper bound {upper} is below the unrestricted optimum {lower}")]
    BoundInversion { upper: f64, lower: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
