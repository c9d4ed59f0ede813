//! Crate-wide error type.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by geometry, persistence, metric, and I/O operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("stride mismatch: strides ({row_stride}, {col_stride}) do not divide shape {height}x{width}")]
    StrideMismatch {
        row_stride: usize,
        col_stride: usize,
        height: usize,
        width: usize,
    },

    #[error("degenerate graph: need at least 2 points, got {0}")]
    DegenerateGraph(usize),

    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("EMD requires equal sizes, got {0} and {1}")]
    EmdSizeMismatch(usize, usize),

    #[error("empty histogram: all points of the {0} cloud fall outside the extent")]
    EmptyHistogram(&'static str),

    #[error("no cells valid in both images")]
    NoCoValidCells,

    #[error("trajectory length mismatch: {0} vs {1}")]
    TrajectoryLengthMismatch(usize, usize),

    #[error("degenerate alignment: translations are rank-deficient")]
    DegenerateAlignment,

    #[error("invalid rotation: not orthonormal with det +1 within 1e-6")]
    InvalidRotation,

    #[error("delta {delta} out of range for trajectory of length {len}")]
    DeltaOutOfRange { delta: usize, len: usize },

    #[error("no dynamic content in segmentation mask")]
    NoDynamicContent,

    #[error("insufficient target width: sector {sector} is {width} columns, source content spans {required}")]
    InsufficientTargetWidth {
        sector: usize,
        width: usize,
        required: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite {what} at optimization step {step}")]
    NonFiniteAtStep { what: &'static str, step: usize },

    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed {format} file {path}: {message}")]
    Format {
        format: &'static str,
        path: PathBuf,
        message: String,
    },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
