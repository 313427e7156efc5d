use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Every pixel must be hit by at least one nonzero mask entry, otherwise
    /// the per-pixel normalizer of the projection steps is undefined.
    #[error("mask cube has a dead pixel at ({row}, {col}): sum of squared mask entries is zero")]
    DeadPixel { row: usize, col: usize },

    #[error("dense materialization refused: {entries} tensor entries exceed the cap of {cap}")]
    DenseCap { entries: usize, cap: usize },

    /// Non-finite sample found while ingesting data from a file or generator.
    #[error("non-finite sample at flat offset {offset}")]
    NonFiniteInput { offset: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("mask generation failed: {0}")]
    Generation(String),

    #[error("config: {0}")]
    Config(String),

    // Tensor-file diagnostics, one variant per failure mode.
    #[error("bad magic: not a SCIT tensor file")]
    BadMagic,
    #[error("unsupported SCIT version byte {0:?}")]
    BadVersion(u8),
    #[error("unknown dtype code {0} (expected 1 = f32 or 2 = f64)")]
    BadDtype(u8),
    #[error("unsupported tensor rank {0} (expected 2 or 3)")]
    BadRank(u8),
    #[error("zero dimension in tensor header")]
    ZeroDim,
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
