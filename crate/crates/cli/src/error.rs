use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(geoprox::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Solver(_) => EXIT_SOLVER,
            Self::Io { .. } => EXIT_FAILED,
        }
    }
}

/// Library errors raised while validating inputs are configuration errors;
/// anything else is a solver failure.
impl From<geoprox::Error> for CliError {
    fn from(e: geoprox::Error) -> Self {
        use geoprox::Error as E;
        match e {
            E::DimensionMismatch { .. }
            | E::InvalidPoint(_)
            | E::InvalidSpace(_)
            | E::Inadmissible { .. }
            | E::UnsupportedDimension { .. }
            | E::InvalidFunctional(_)
            | E::InvalidConfig(_)
            | E::Antipodal => Self::Config(e.to_string()),
            other => Self::Solver(other),
        }
    }
}
