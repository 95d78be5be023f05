use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("capacity exceeded: predicted {predicted:.3e} points, cap {cap:.3e}")]
    CapacityExceeded { predicted: f64, cap: f64 },
    #[error("singular matrix (|det| = {0:e})")]
    SingularMatrix(f64),
    #[error("vector {0:?} is not primitive")]
    NotPrimitive([i64; 3]),
    #[error("denominator must exceed one")]
    DenominatorOne,
    #[error("best approximation sequence too short: {0} records")]
    SequenceTooShort(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("empty level {level}: {detail}")]
    EmptyLevel { level: usize, detail: String },
    #[error("zero functional")]
    ZeroFunctional,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("horizon too short: {0}")]
    HorizonTooShort(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("u = {u:?} not in Q_eps: r(u)|u| = {value:e} >= eps = {eps:e}")]
    NotInQEps { u: [i64; 3], value: f64, eps: f64 },
    #[error("r(u) routes disagree: brute force {brute:e}, projected lattice {lattice:e}")]
    RouteMismatch { brute: f64, lattice: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
