use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quaternion: {0}")]
    InvalidQuaternion(String),

    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("frame is empty")]
    EmptyFrame,

    #[error("kernel of size {kernel} does not fit a {width}x{height} image")]
    KernelTooLarge {
        kernel: usize,
        width: usize,
        height: usize,
    },

    #[error("perturbation kind `{kind}` cannot be applied here (expected {expected})")]
    KindMismatch { kind: String, expected: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("delay of {delay} frames (jitter {jitter}) exceeds sequence length {len}")]
    DelayExceedsSequence { delay: usize, jitter: usize, len: usize },

    #[error("no timestamp associations between estimate and ground truth")]
    NoAssociations,

    #[error("trajectory too short: {0} associated poses, need at least 2")]
    TooShort(usize),

    #[error("ground-truth path length is zero")]
    DegenerateGroundTruth,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("plan shape error: {0}")]
    PlanShape(String),

    #[error("missing source sequence for scene `{0}`")]
    MissingSource(String),

    #[error("layout error in {path}: {message}")]
    Layout { path: PathBuf, message: String },

    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error at {path}: {source}")]
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

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
