//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Normalization of an all-zero vector is undefined.
    #[error("cannot encode an all-zero vector")]
    ZeroVector,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("statevector norm {norm} is outside the 1e-10 tolerance")]
    NotNormalized { norm: f64 },

    #[error("amplitude count {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    /// The two states of a difference transform are identical; the ancilla
    /// never lands in the post-selected branch. Callers treat the pair as a
    /// zero-contribution frame pair.
    #[error("degenerate difference: states are identical, success probability is 0")]
    DegenerateDifference,

    #[error("duplicate QRAM key (class {class_id}, video {video_id}, pair {pair_index})")]
    DuplicateKey {
        class_id: u32,
        video_id: u32,
        pair_index: u32,
    },

    #[error("pair index {pair_index} outside 0..{pairs_per_video}")]
    PairIndexOutOfRange {
        pair_index: u32,
        pairs_per_video: u32,
    },

    #[error("class {class_id} has no stored videos")]
    EmptyClass { class_id: u32 },

    #[error("video {video_id} of class {class_id} is missing {missing} frame pair(s)")]
    IncompleteVideo {
        class_id: u32,
        video_id: u32,
        missing: u32,
    },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic {
        expected: &'static str,
        found: [u8; 4],
    },

    #[error("file ends before the declared payload")]
    TruncatedFile,

    #[error("pixel {index} has value {value} outside [0, 1]")]
    PixelOutOfRange { index: usize, value: f64 },

    #[error("input {dim} {actual} is smaller than target {target}")]
    TooSmall {
        dim: &'static str,
        actual: u32,
        target: u32,
    },

    #[error("malformed {what}: {detail}")]
    Malformed {
        what: &'static str,
        detail: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A module error raised inside a sweep, annotated with the cell that
    /// produced it.
    #[error("sweep cell (k={k}, M={m}, q={q}, trial={trial}): {source}")]
    SweepCell {
        k: u32,
        m: u32,
        q: u32,
        trial: u32,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by configuration (bad flags, bad config keys,
    /// out-of-range parameters) rather than by data files or computation.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::InvalidConfig(_) => true,
            Error::SweepCell { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
