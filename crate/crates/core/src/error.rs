use thiserror::Error;

/// Errors raised by the laboratory's constructions and checkers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inclusion is not unital: column {column} has Σ Λ_ij p_i = {got}, expected {expected}")]
    NonUnitalInclusion { column: usize, got: u64, expected: u64 },

    #[error("duplicate root {0} in annihilator spectrum")]
    DuplicateRoot(f64),

    #[error("tolerance {tol} not reached below degree cap {cap} (best error {best})")]
    ToleranceUnreachable { tol: f64, cap: usize, best: f64 },

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("word-span iteration did not stabilise within {cap} rounds")]
    GenerationCapExceeded { cap: usize },

    #[error("cost guard: {what} requires {needed} evaluations, limit {limit}")]
    CostGuard {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("inconsistent representation: {0}")]
    InconsistentRepresentation(String),

    #[error("witness precondition failed: {0}")]
    WitnessViolation(String),

    #[error("certificate violated: {0}")]
    CertificateViolation(String),

    #[error("separation certificate failed for pair ({first}, {second}): distance {distance} < {threshold}")]
    SeparationViolation {
        first: usize,
        second: usize,
        distance: f64,
        threshold: f64,
    },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a mathematical certificate, as opposed to bad input.
    pub fn is_certificate_failure(&self) -> bool {
        matches!(self, Error::CertificateViolation(_) | Error::SeparationViolation { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
