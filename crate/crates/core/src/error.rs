use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {}", .0.display())]
    UnsupportedFormat(PathBuf),
    #[error("failed to decode {}: {reason}", path.display())]
    DecodeError { path: PathBuf, reason: String },
    #[error("not a directory: {}", .0.display())]
    NotADirectory(PathBuf),
    #[error("no images found under {}", .0.display())]
    EmptyDataset(PathBuf),
    #[error("noise variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("distance {distance} too large for a {width}x{height} image")]
    DistanceTooLarge {
        distance: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("code {0} is outside the 9-bit range")]
    CodeOutOfRange(u32),
    #[error("spatial cell ({cx}, {cy}) contains no valid pixels")]
    EmptyCell { cx: usize, cy: usize },

    #[error("descriptor configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("index is empty")]
    EmptyIndex,
    #[error("image id {0} is not in the index")]
    QueryNotInIndex(u32),
    #[error("degenerate split: {probe} probe and {gallery} gallery images")]
    DegenerateSplit { probe: usize, gallery: usize },

    #[error("bad magic in index file")]
    BadMagic,
    #[error("unsupported index format version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt index file: {0}")]
    CorruptFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
