//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset file not found: {0}")]
    MissingFile(PathBuf),

    #[error("malformed record at row {row}: {reason}")]
    MalformedRecord { row: usize, reason: String },

    #[error("dataset {0} contains no records")]
    EmptyDataset(PathBuf),

    #[error("duplicate record id {0:?} in dataset")]
    DuplicateId(String),

    #[error("label {label:?} has {have} samples, need at least {need}")]
    InsufficientLabel {
        label: String,
        have: usize,
        need: usize,
    },

    #[error("record {id} has status {status}, only valid records can be assembled")]
    InvalidStatus { id: String, status: String },

    #[error("record {0} does not resolve to a seed sentence")]
    UnresolvedLineage(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("training requires at least 2 distinct labels, got {0}")]
    SingleLabel(usize),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("group {0:?} has no round-1 records to derive cues from")]
    EmptyGroup(String),

    #[error("cannot take the centroid of an empty vector set")]
    EmptyCentroid,

    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("embedding for {0} contains a non-finite value")]
    NonFiniteEmbedding(String),

    #[error("cue variant does not match strategy {strategy}: {detail}")]
    CueMismatch { strategy: String, detail: String },

    #[error("provider {provider} rejected authentication (status {status})")]
    AuthFailure { provider: String, status: u16 },

    #[error("prompt {prompt_id}: request timed out after {attempts} attempt(s)")]
    Timeout { prompt_id: String, attempts: u32 },

    #[error("prompt {prompt_id}: retries exhausted after {attempts} attempt(s): {last}")]
    ExhaustedRetries {
        prompt_id: String,
        attempts: u32,
        last: String,
    },

    #[error("provider {provider} returned an unusable response: {detail}")]
    BadResponse { provider: String, detail: String },

    #[error("all pairwise differences are zero; the signed-rank test is undefined")]
    AllZeroDifferences,

    #[error("empty sample passed to a rank test")]
    EmptySample,

    #[error("iteration counts differ across strategies: {0}")]
    MismatchedIterations(String),

    #[error("run artifact missing: {0}")]
    MissingArtifact(PathBuf),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
