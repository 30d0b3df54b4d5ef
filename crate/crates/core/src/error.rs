use thiserror::Error;

/// Errors raised by the trace engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OtocError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed coefficient table: {0}")]
    MalformedTable(String),

    #[error("non-resonant monomial alpha={alpha:?} beta={beta:?} with |h| = {magnitude:e}")]
    NonResonantMonomial {
        alpha: Vec<u32>,
        beta: Vec<u32>,
        magnitude: f64,
    },

    #[error("converted coefficient for {exponents:?} keeps imaginary part {imag:e}")]
    ComplexResidue { exponents: Vec<u32>, imag: f64 },

    #[error("exponent overflow: |argument| = {0} exceeds the double range guard")]
    InfOverflow(f64),

    #[error("degenerate orbit: Lambda*tau = {0:e} is too small")]
    DegenerateOrbit(f64),

    #[error("no root found for winding {winding:?}")]
    NoRoot { winding: Vec<i64> },

    #[error("singular frequency Jacobian (|det| = {0:e})")]
    SingularJacobian(f64),

    #[error("energy {energy} is not above the saddle energy {saddle}")]
    BelowSaddle { energy: f64, saddle: f64 },

    #[error("degenerate bordered Hessian (|det| = {0:e})")]
    DegenerateHessian(f64),

    #[error("quadrature did not converge (last change {0:e})")]
    QuadratureNotConverged(f64),

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("depth {depth} outside 1..={m_max}")]
    DepthOutOfRange { depth: usize, m_max: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no orbit contributed at any observation time")]
    EmptySum,

    #[error("series crosses zero inside the fit window")]
    ZeroCrossing,

    #[error("integrator diverged at t = {0}")]
    IntegratorDiverged(f64),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for OtocError {
    fn from(err: std::io::Error) -> Self {
        OtocError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, OtocError>;
