// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subsequence length m={m} for series of length n={n}")]
    InvalidWindow { m: usize, n: usize },

    #[error("window statistics were computed for m={stats} but m={requested} was requested")]
    StatsMismatch { stats: usize, requested: usize },

    #[error("query offset {offset} out of range (only {count} subsequences)")]
    OffsetOutOfRange { offset: usize, count: usize },

    #[error("cannot find the {k}-th nearest neighbor: only {found} non-trivial neighbors exist")]
    InfeasibleK { k: usize, found: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("series of length {n} is too short, at least {required} time steps are needed")]
    SeriesTooShort { n: usize, required: usize },

    #[error("rank {rank} out of range, profile has {available} column(s)")]
    RankOutOfRange { rank: usize, available: usize },

    #[error("unsupported profile variant: {0}")]
    InvalidVariant(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("training labels contain no anomaly, AUC-ROC is undefined")]
    NoAnomalyInTrainLabels,

    #[error("labels must contain both positive and negative entries")]
    DegenerateLabels,

    #[error("labels contain no anomaly range")]
    NoAnomalyRange,

    #[error("hyper-parameter grid is empty")]
    EmptyGrid,

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: usize },

    #[error("timestamp at row {row} does not increase strictly")]
    NonMonotonicTimestamp { row: usize },

    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Whether the error stems from a configuration that cannot be satisfied
    /// by the data (window too long, k too large, unknown rank, ...), as
    /// opposed to malformed input data.
    pub fn is_infeasible_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidWindow { .. }
                | Error::StatsMismatch { .. }
                | Error::OffsetOutOfRange { .. }
                | Error::InfeasibleK { .. }
                | Error::SeriesTooShort { .. }
                | Error::RankOutOfRange { .. }
                | Error::InvalidVariant(_)
                | Error::EmptyGrid
                | Error::SpecInvalid(_)
        )
    }
}
