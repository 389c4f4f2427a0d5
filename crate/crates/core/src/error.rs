use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not Hermitian (max |a - a^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("support violation: relative entropy diverges ({0})")]
    SupportViolation(String),

    #[error("invalid inverse temperature {0}")]
    InvalidBeta(f64),

    #[error("pointer must be at least as cold as the system (beta_p = {beta_p}, beta_s = {beta_s})")]
    InvalidTemperatureOrder { beta_s: f64, beta_p: f64 },

    #[error("invalid assignment matrix: {0}")]
    InvalidAssignment(String),

    #[error("invalid pointer model: {0}")]
    InvalidPointer(String),

    #[error("outcome {n} out of range for {d} outcomes")]
    OutcomeOutOfRange { n: usize, d: usize },

    #[error("populations not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("spectrum has a gap of {0:e}, too small for a projective energy measurement")]
    DegenerateSpectrum(f64),

    #[error("Hamiltonian is not time-reversal symmetric (max |conj(H) - H| = {0:e})")]
    NotTimeReversalSymmetric(f64),

    #[error("expected a real result, imaginary part is {0:e}")]
    NonRealResult(f64),

    #[error("chi vanishes ({0:e}); bound is undefined")]
    ChiZero(f64),

    #[error("process has no time family")]
    MissingTimeFamily,

    #[error("time {t} outside [0, {t_f}]")]
    InvalidTime { t: f64, t_f: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration does not match figure setup: {0}")]
    ConfigMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
