use thiserror::Error;

/// Errors raised by the laboratory's library operations.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have dimension at least 1")]
    EmptyMatrix,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension {0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("conditional expectation of VV* differs from the identity by {defect:e}")]
    ConditionalExpectationDefect { defect: f64 },

    #[error("channel is not unital: ‖Σ VᵢVᵢ* − 1‖ = {defect:e}")]
    NotUnital { defect: f64 },

    #[error("channel has no Kraus operators")]
    NoKrausOperators,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state is not invariant: ‖φ∘T − φ‖₁ = {defect:e}")]
    NotInvariant { defect: f64 },

    #[error("horizon must be at least {min}, got {found}")]
    InvalidHorizon { min: usize, found: usize },

    #[error("index sequence is not strictly increasing at position {position}")]
    NotIncreasing { position: usize },

    #[error("index sequence has {found} entries, horizon needs {needed}")]
    SequenceTooShort { needed: usize, found: usize },

    #[error("point {re}+{im}i is not on the unit circle")]
    OffCircle { re: f64, im: f64 },

    #[error("generator window [{lo}, {hi}] is too narrow, need [{need_lo}, {need_hi}]")]
    WindowTooNarrow {
        lo: i32,
        hi: i32,
        need_lo: i32,
        need_hi: i32,
    },

    #[error("shifted words are not pairwise distinct (collision at shift {0})")]
    ShiftCollision(usize),

    #[error("weight generator is not flagged uniquely ergodic (alpha = {alpha})")]
    GeneratorNotUniquelyErgodic { alpha: f64 },

    #[error("weight sequence has {found} entries, horizon needs {needed}")]
    WeightsTooShort { needed: usize, found: usize },

    #[error(
        "spectral and empirical routes disagree on {test}: spectral = {spectral}, empirical = {empirical}"
    )]
    RouteDisagreement {
        test: String,
        spectral: bool,
        empirical: bool,
    },

    #[error("implication violated: {statement}; evidence: {evidence}")]
    ImplicationViolated { statement: String, evidence: String },

    #[error("{what} requires a strictly weak mixing channel")]
    NotStrictlyWeakMixing { what: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("eigenvalue solver failed: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
