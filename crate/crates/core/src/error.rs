use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid framework: {0}")]
    InvalidFramework(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("C not complementary to T (rank of [C T] is {rank}, need {needed})")]
    NotComplementary { rank: usize, needed: usize },

    #[error("no nonzero singular value of R(p)C; the framework has no rigid part to measure")]
    NoNonzeroSingularValue,

    #[error("stress certificate unavailable: {0}")]
    NoCertificate(String),

    #[error("kappa problem infeasible: {0}")]
    KappaInfeasible(String),

    #[error("conic solver did not converge after {iterations} iterations (gap {gap:.3e}, centering residual {decrement:.3e})")]
    ConicNotConverged {
        iterations: usize,
        gap: f64,
        decrement: f64,
    },

    #[error("edge solver did not converge: max residual {max_residual:.3e} after {iterations} iterations")]
    SolverNotConverged {
        iterations: usize,
        max_residual: f64,
        best: Vec<f64>,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unknown corpus entry `{0}`")]
    UnknownCorpusEntry(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
