use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("image data has {len} values, expected {width}x{height}x{channels}")]
    ShapeMismatch {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },
    #[error("intensity {0} outside [0, 1]")]
    IntensityOutOfRange(f64),
    #[error("unsupported channel count {0}")]
    Channels(usize),
    #[error("images in a sample set must share dimensions and channels")]
    MixedShapes,
    #[error("{labels} labels for {images} images")]
    LabelCount { images: usize, labels: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown transform `{0}`")]
    UnknownTransform(String),
    #[error("invalid parameter for `{transform}`: {reason}")]
    InvalidParam { transform: String, reason: String },
    #[error("cannot parse transform `{0}`")]
    Syntax(String),
    #[error("unknown surrogate profile `{0}`")]
    UnknownProfile(String),
    #[error("sequence of length {len} exceeds horizon {horizon}")]
    HorizonExceeded { len: usize, horizon: usize },

    #[error("sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("unsupported Wasserstein order p = {0}")]
    UnsupportedOrder(u32),
    #[error("target dimension {m} exceeds ambient dimension {n}")]
    ProjectionDim { m: usize, n: usize },
    #[error("zero variance, correlation is undefined")]
    DegenerateCorrelation,

    #[error("both classes must be present")]
    SingleClass,
    #[error("k = {k} exceeds the {n} available points")]
    TooManyClusters { k: usize, n: usize },
    #[error("non-finite loss at episode {episode}, step {step}")]
    Diverged { episode: usize, step: usize },
    #[error("episode already finished")]
    EpisodeDone,
    #[error("policy has {policy} actions but the library has {library}")]
    ActionCount { policy: usize, library: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}
