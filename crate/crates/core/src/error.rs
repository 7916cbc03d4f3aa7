//! Error type shared by all modules.
//!
//! Structural errors (bad shapes, empty inputs, violated hypotheses) are
//! `Err` values; quantitative bound failures are entries of a
//! [`crate::report::CertificateReport`], never errors, except where an
//! operation's contract says a failed certificate aborts the construction.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance matrix is not square: {rows} rows for {n} points")]
    NonSquare { n: usize, rows: usize },

    #[error("non-finite distance entry at ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("a metric space needs at least one point")]
    EmptySpace,

    #[error("subset mask must be non-empty")]
    EmptyMask,

    #[error("point index {index} out of range for space of {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("operands live on different point sets ({detail})")]
    PointSetMismatch { detail: String },

    #[error("size mismatch: {left} vs {right} points")]
    SizeMismatch { left: usize, right: usize },

    #[error("partition is invalid: {detail}")]
    InvalidPartition { detail: String },

    #[error("cantor level {level} outside supported range 1..=16")]
    LevelOutOfRange { level: u32 },

    #[error("eps must satisfy {requirement}, got {value}")]
    EpsOutOfRange { requirement: String, value: f64 },

    #[error("seed metric has {available} points but block {block} needs {needed}")]
    SeedTooSmall {
        block: usize,
        needed: usize,
        available: usize,
    },

    #[error("scaling infeasible for block {block}: {constraint}")]
    InfeasibleScaling { block: usize, constraint: String },

    #[error("hypothesis violated: {requirement} fails at point {witness}")]
    HypothesisViolated { requirement: String, witness: String },

    #[error("input not certified: {check} failed ({detail})")]
    NotCertified { check: String, detail: String },

    #[error("certificate {check} failed during construction: {detail}")]
    CertificateFailed { check: String, detail: String },

    #[error("constructed object violates metric axioms: {detail}")]
    ConstructionInvalid { detail: String },

    #[error("measure is not zero-sum: total weight {total}")]
    UnbalancedMeasure { total: f64 },

    #[error("measure support of size {support} exceeds the brute-force limit {limit}")]
    SupportTooLarge { support: usize, limit: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("transport solver stalled after {iterations} pivots (internal bug)")]
    SolverStall { iterations: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn at_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
