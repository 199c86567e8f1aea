use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range for a {n_qubits}-qubit register (sites are 1-based)")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("duplicate site {0} in partial-trace list")]
    DuplicateSite(usize),

    #[error("partial trace keeps {0} sites; only 1 or 2 are supported")]
    UnsupportedTraceWidth(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sector with magnetization {magnetization} is empty for {n_qubits} qubits")]
    EmptySector { n_qubits: usize, magnetization: i32 },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("density matrix is not valid: {0}")]
    InvalidDensityMatrix(String),

    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ground state is not separated from the first excitation (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },

    #[error("Krylov step size underflow at t = {time} (step {step:e} cannot reach tolerance)")]
    StepUnderflow { time: f64, step: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("peak search window [{t_min}, {t_max}] contains no grid points")]
    EmptyWindow { t_min: f64, t_max: f64 },

    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),

    #[error("strategy ordering violated: {0}")]
    OrderingViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
