use std::path::PathBuf;

use crate::dataset::Direction;

pub type Result<T, E = VceiError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum VceiError {
    #[error("malformed pair file {path}: row {row}: {message}")]
    MalformedFile { path: PathBuf, row: usize, message: String },

    #[error("insufficient data: got {got} samples, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("degenerate sample set: {0}")]
    DegenerateSample(String),

    #[error("b_alpha = {b_alpha} is below the simplex minimum 1/{m} = {min}")]
    InfeasibleBound { b_alpha: f64, m: usize, min: f64 },

    #[error("solver failed ({status}): {message}")]
    Solver { status: String, message: String },

    #[error("insufficient support: {surviving} sample(s) with positive weight, need at least 2")]
    InsufficientSupport { surviving: usize },

    #[error("factorization failed after jitter retries (last jitter {jitter:e})")]
    Factorization { jitter: f64 },

    #[error("{direction} direction failed: {source}")]
    Direction {
        direction: Direction,
        #[source]
        source: Box<VceiError>,
    },

    #[error("both directions failed: x->y: {xy}; y->x: {yx}")]
    Pipeline { xy: Box<VceiError>, yx: Box<VceiError> },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl VceiError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VceiError::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the root cause is a numerical solver failure.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            VceiError::Solver { .. } | VceiError::Factorization { .. } => true,
            VceiError::Direction { source, .. } => source.is_solver_failure(),
            VceiError::Pipeline { xy, yx } => xy.is_solver_failure() || yx.is_solver_failure(),
            _ => false,
        }
    }

    /// True when the error came from reading or parsing input files.
    pub fn is_input_failure(&self) -> bool {
        matches!(
            self,
            VceiError::MalformedFile { .. } | VceiError::Io { .. } | VceiError::InsufficientData { .. }
        )
    }
}
