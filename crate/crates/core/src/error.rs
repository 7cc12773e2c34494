use thiserror::Error;

use crate::geometry::SpherePoint;
use crate::ppa::PpaTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid model space: {0}")]
    InvalidSpace(String),

    #[error("geodesic parameter {t} outside [0, {length}]")]
    ParameterOutOfRange { t: f64, length: f64 },

    #[error("endpoints are antipodal; the geodesic between them is not unique")]
    Antipodal,

    #[error("penalty argument {0} outside [0, pi/2)")]
    PenaltyDomain(f64),

    #[error("point is not admissible with respect to anchor {index} (distance {distance})")]
    Inadmissible { index: usize, distance: f64 },

    #[error("triangle perimeter {0} is not below 2*pi")]
    Perimeter(f64),

    #[error("unsupported dimension {dim}: {what} requires the 2-sphere")]
    UnsupportedDimension { dim: usize, what: &'static str },

    #[error("invalid functional: {0}")]
    InvalidFunctional(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("geodesic descent cannot minimize a non-smooth objective; use nested golden-section")]
    NonSmooth,

    #[error("inner solver stopped after {iterations} iterations with residual {residual}")]
    SolverNotConverged {
        best: SpherePoint,
        residual: f64,
        iterations: usize,
    },

    #[error("proximal step {step} failed: {source}")]
    RunFailed {
        step: usize,
        #[source]
        source: Box<Error>,
        partial: Box<PpaTrace>,
    },

    #[error("trace is empty")]
    EmptyTrace,
}
