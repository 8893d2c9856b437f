use std::path::PathBuf;

/// Errors raised by the solvers, oracles and I/O helpers of this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric entry {index} is not strictly positive ({value})")]
    NonPositiveMetric { index: usize, value: f64 },

    #[error("invalid metric floor {0}: must lie in (0, 1)")]
    InvalidFloor(f64),

    #[error("no feasible step size: {0}")]
    InfeasibleStep(String),

    #[error("Lipschitz backtracking reached its cap ({cap:e}) without satisfying the quadratic upper bound")]
    BacktrackingCap { cap: f64 },

    #[error("proximal subproblem is unbounded below at step size {alpha}")]
    ProxUnbounded { alpha: f64 },

    #[error("point is outside the domain of the objective (value {0})")]
    OutsideDomain(f64),

    #[error("objective is not proper: evaluated to {0}")]
    ImproperObjective(f64),

    #[error("certificate violated at iteration {iteration}: {detail}")]
    Certificate { iteration: usize, detail: String },

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed PGM file: {0}")]
    Pgm(String),

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
