use thiserror::Error;

use crate::qfa::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("letter index {index} out of range for alphabet of size {size}")]
    LetterOutOfRange { index: usize, size: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("alphabet mismatch: {left:?} vs {right:?}")]
    AlphabetMismatch { left: Vec<String>, right: Vec<String> },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("automaton failed validation:\n{0}")]
    Validation(ValidationReport),
    #[error("state has support outside the non-halting subspace (mass {0:.3e})")]
    SupportOutsideNonHalting(f64),
    #[error("state is not in E2 (E1 component has norm {0:.3e})")]
    NotInE2(f64),
    #[error("E2 is empty")]
    EmptyE2,
    #[error("no contraction: best block keeps ratio {ratio:.9} of the norm")]
    NonContracting { ratio: f64 },
    #[error("vanishing-word search exceeded {0} rounds")]
    IterationCap(usize),
    #[error("probability {0} outside (1/2, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("union hypothesis 1/p1 + 1/p2 < 3 fails (sum = {0})")]
    UnionHypothesis(f64),
    #[error("empty point set")]
    EmptyPointSet,
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}
