use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point is {distance:.3e} away from the shape (tolerance 1e-8)")]
    NotOnShape { distance: f64 },

    #[error("invalid plane: {0}")]
    InvalidPlane(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} lies outside the mesh box")]
    OutsideMesh { point: Vec<f64> },

    #[error("empty cell")]
    EmptyCell,

    #[error("regularized mass {value:.3e} at {point:?} is below the floor {floor:.3e}")]
    DenominatorTooSmall { point: Vec<f64>, value: f64, floor: f64 },

    #[error("support of {size} atoms exceeds the cap of {cap}")]
    SupportTooLarge { size: usize, cap: usize },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("time {t} is at or beyond the extinction time {extinction}")]
    Extinction { t: f64, extinction: f64 },

    #[error("time step {dt:.3e} exceeds the stability limit {limit:.3e}")]
    Unstable { dt: f64, limit: f64 },

    #[error("polyline self-intersects (segments {first} and {second})")]
    SelfIntersection { first: usize, second: usize },

    #[error("hypothesis 2h <= gamma*eps violated: 2h = {two_h:.3e}, gamma*eps = {gamma_eps:.3e}")]
    HypothesisViolated { two_h: f64, gamma_eps: f64 },

    #[error("feasible gamma {gamma:.3e} is below the floor {floor:.3e}")]
    GammaInfeasible { gamma: f64, floor: f64 },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
