use thiserror::Error;

/// Every failure surfaced by the geometry kernels and the scenario runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("frame is too close to a complex plane (defect {defect:.3e} below tolerance {tol:.1e})")]
    NearComplexPlane { defect: f64, tol: f64 },
    #[error("Hermitian structure is not positive definite / Hermitian: {0}")]
    NotHermitian(String),
    #[error("point outside the chart domain")]
    OutOfDomain,
    #[error("derivative of order {order} unavailable for this chart")]
    DerivativeOrderUnavailable { order: usize },
    #[error("chart declares no Einstein constant")]
    NoEinsteinConstant,
    #[error("integration left the chart domain")]
    LeftDomain,
    #[error("invalid immersion: {0}")]
    InvalidImmersion(String),
    #[error("Ricci endomorphism singular at node {node} (|det A| = {det:.3e})")]
    SingularA { node: usize, det: f64 },
    #[error("immersion is not critical: sup|xi_J| = {sup:.3e} exceeds {threshold:.1e}")]
    NotCritical { sup: f64, threshold: f64 },
    #[error("Maslov form is not exact: loop integrals {loops:?} exceed {tol:.1e}")]
    NotExact { loops: Vec<f64>, tol: f64 },
    #[error("form is degenerate at the evaluation point")]
    DegenerateForm,
    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),
    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("Jacobian is singular on the admissible subspace")]
    SingularJacobian,
    #[error("continuation step failed at t = {t}")]
    StepFailed { t: f64 },
    #[error("continuation stalled at t = {t} (step below {min_step:.1e})")]
    ContinuationStalled { t: f64, min_step: f64 },
    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },
    #[error("task `{task}` failed: {source}")]
    Task { task: String, source: Box<GeomError> },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
