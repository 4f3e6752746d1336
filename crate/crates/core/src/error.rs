use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("no edge states found (threshold {threshold})")]
    NoEdgeStates { threshold: f64 },

    #[error("ambiguous edge states: {count} eigenstates exceed boundary weight {threshold}")]
    AmbiguousEdgeStates { count: usize, threshold: f64 },

    #[error("target coefficient p_f = {p_f} is not below the smallest other coefficient {min_other}")]
    TargetNotMinimal { p_f: f64, min_other: f64 },

    #[error("stability guard violated at t = {time}: dt * |H| = {product} >= 0.5")]
    StabilityGuard { time: f64, product: f64 },

    #[error("state became non-finite at t = {time}")]
    NonFinite { time: f64 },

    #[error("density block is not positive semidefinite (violation {violation:e})")]
    NotPositive { violation: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidLattice(_) | Error::InvalidParameter(_) | Error::TargetNotMinimal { .. } => 2,
            Error::NoConvergence { .. }
            | Error::StabilityGuard { .. }
            | Error::NonFinite { .. }
            | Error::NotPositive { .. } => 3,
            Error::NoEdgeStates { .. } | Error::AmbiguousEdgeStates { .. } => 4,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}
