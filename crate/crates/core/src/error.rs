use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration invariant does not hold. The string names the invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient bound states: found {found} negative eigenvalues, need {needed}")]
    InsufficientBoundStates { found: usize, needed: usize },

    #[error("degenerate trap: wells overlap (V(0) = {v0:.6} < -U = {neg_depth:.6})")]
    DegenerateTrap { v0: f64, neg_depth: f64 },

    #[error("symmetrization produced a null state for eigenpair {index}")]
    NullSymmetrization { index: usize },

    #[error("symmetry-structure violation: {0}")]
    SymmetryStructure(String),

    #[error("non-finite wavefunction at step {step}")]
    NonFinite { step: usize },

    #[error("step-size failure: {0}")]
    StepSize(String),

    #[error("no suppression feature above level {level}")]
    NoFeature { level: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
