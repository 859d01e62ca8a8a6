use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for width {width}")]
    IndexOutOfRange { index: usize, width: usize },

    #[error("qubit {0} used more than once by a single gate")]
    OverlappingQubits(usize),

    #[error("width mismatch: expected {expected} qubits, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("register mismatch: {0}")]
    RegisterMismatch(String),

    #[error("outcome has probability {probability:e}, below the floor {floor:e}")]
    ZeroProbability { probability: f64, floor: f64 },

    #[error("circuit width {width} exceeds the dense cap of {cap} qubits")]
    DenseCapExceeded { width: usize, cap: usize },

    #[error("vector is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("index k = {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("function returned a non-finite value at x = {0}")]
    NonFinite(f64),

    #[error("gamma = {gamma} is smaller than the measured sup-norm {sup}")]
    GammaTooSmall { gamma: f64, sup: f64 },

    #[error("polynomial sup-norm {sup} exceeds the admissible bound {bound}")]
    SupNormViolation { sup: f64, bound: f64 },

    #[error("phase factors did not converge (best residual {best_residual:e}, tolerance {tol:e})")]
    PhaseNonConvergence { best_residual: f64, tol: f64 },

    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("polynomial has no definite parity")]
    IndefiniteParity,

    #[error("block is not Hermitian (residual {0:e})")]
    NonHermitian(f64),

    #[error("success probability {probability:e} below the floor {floor:e}")]
    Unamplifiable { probability: f64, floor: f64 },

    #[error("approximation budget violated: {0}")]
    BudgetViolated(String),

    #[error("Bernoulli workspace exhausted for {0} Taylor terms")]
    BernoulliOverflow(usize),

    #[error("estimation needs {needed} evaluation qubits, cap is {cap}")]
    EstimationDepth { needed: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors that stem from a violated numerical contract rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PhaseNonConvergence { .. }
                | Error::NonHermitian(_)
                | Error::Unamplifiable { .. }
                | Error::BudgetViolated(_)
                | Error::SupNormViolation { .. }
                | Error::ZeroProbability { .. }
                | Error::NotUnitary(_)
        )
    }
}
