//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by volume loading, partitioning, and the statistical
/// pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("manifest parse error: {0}")]
    ManifestParse(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("manifest mismatch for '{sample_id}': {reason}")]
    ManifestMismatch { sample_id: String, reason: String },

    #[error("invalid manifest for '{sample_id}': {reason}")]
    InvalidManifest { sample_id: String, reason: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("degenerate VOI: {0}")]
    DegenerateVoi(String),

    #[error("VOI out of bounds: origin {origin:?} extent {extent:?} exceeds dims {dims:?}")]
    VoiOutOfBounds {
        origin: [usize; 3],
        extent: [usize; 3],
        dims: [usize; 3],
    },

    #[error("threshold {threshold} out of range for bit depth {bit_depth}")]
    InvalidThreshold { threshold: u16, bit_depth: u8 },

    #[error("{divisions} divisions yield empty subcubes for dims {dims:?}")]
    TooManyDivisions { divisions: u32, dims: [usize; 3] },

    #[error("subcube index {index:?} out of range for grid counts {counts:?}")]
    IndexOutOfRange {
        index: [usize; 3],
        counts: [usize; 3],
    },

    #[error("degenerate attribute {attribute}: {reason}")]
    DegenerateAttribute { attribute: String, reason: String },

    #[error("constant dataset: pooled standard deviation is zero")]
    ConstantDataset,

    #[error("empty input")]
    EmptyInput,

    #[error("missing standardization for continuous attribute {0}")]
    MissingStandardization(String),

    #[error("entropy quadrature did not converge below {tol} bits at {grid_points} grid points")]
    NumericalInstability { tol: f64, grid_points: usize },

    #[error("batch mixes attributes or division counts: {0}")]
    HeterogeneousBatch(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("group {0} is empty")]
    EmptyGroup(u8),

    #[error("non-finite value in input")]
    NonFiniteValue,

    #[error("slice too small for co-occurrence offset: {width}x{height}, distance {distance}")]
    DegenerateSlice {
        width: usize,
        height: usize,
        distance: usize,
    },

    #[error("invalid phantom spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no samples survived the pipeline ({skipped} skipped)")]
    NoSurvivors { skipped: usize },
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Csv(format!("{other:?}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
