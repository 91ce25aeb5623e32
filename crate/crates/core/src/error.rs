use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, VqError>;

#[derive(Debug, Error)]
pub enum VqError {
    #[error("file not found: {}", path.display())]
    NotFound { path: PathBuf },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("unsupported PGM maxval {0}, expected 255")]
    UnsupportedMaxval(u32),

    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    TruncatedPixels { expected: usize, found: usize },

    #[error("block side {block_side} does not divide image dimensions {width}x{height}")]
    BlockSideMismatch {
        width: usize,
        height: usize,
        block_side: usize,
    },

    #[error("geometry mismatch: {0}")]
    Geometry(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("codeword index {index} out of range for codebook of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("codebook size {codebook_size} exceeds training vector count {vectors}")]
    CodebookTooLarge { codebook_size: usize, vectors: usize },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("MSE must be non-negative, got {0}")]
    NegativeMse(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bad VQIM header")]
    BadVqimHeader,

    #[error("malformed codebook file: {0}")]
    MalformedCodebookFile(String),

    #[error("malformed VQIM file: {0}")]
    MalformedVqim(String),
}

impl VqError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        let path = path.into();
        if source.kind() == io::ErrorKind::NotFound {
            VqError::NotFound { path }
        } else {
            VqError::Io { path, source }
        }
    }

    /// True for errors caused by bad caller input (arguments, configuration,
    /// incompatible sizes) rather than by unreadable or corrupt files.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            VqError::BlockSideMismatch { .. }
                | VqError::CodebookTooLarge { .. }
                | VqError::InvalidConfig(_)
                | VqError::DimensionMismatch { .. }
                | VqError::EmptyTrainingSet
        )
    }
}
