use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, PvmError>;

#[derive(Debug, Error)]
pub enum PvmError {
    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("path does not exist: {0:?}")]
    MissingPath(PathBuf),

    #[error("could not decode image {path:?}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("frame stream is empty")]
    EmptyStream,

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate bounding box ({w}x{h})")]
    DegenerateBox { w: f64, h: f64 },

    #[error("bad checkpoint magic")]
    Magic,

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("truncated checkpoint: {0}")]
    Truncated(String),

    #[error("level {level} tile ({tx},{ty}): {source}")]
    Tile {
        level: usize,
        tx: usize,
        ty: usize,
        #[source]
        source: Box<PvmError>,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl PvmError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PvmError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(context: &'static str, expected: usize, actual: usize) -> Self {
        PvmError::Shape {
            context,
            expected,
            actual,
        }
    }
}

pub(crate) fn ensure_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(PvmError::shape(context, expected, actual))
    } else {
        Ok(())
    }
}
