use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A gamma conditional ended up with a nonpositive shape parameter.
    #[error("degenerate gamma shape at visible unit {index}: alpha = {alpha}")]
    DegenerateShape { index: usize, alpha: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("exact enumeration refused: {0}")]
    Enumeration(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid config: {0}")]
    Config(String),

    /// Training failure annotated with where it happened.
    #[error("training failed at epoch {epoch}, batch {batch}: {source}")]
    Training {
        epoch: usize,
        batch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),

    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("WAV file contains no audio")]
    EmptyAudio,

    #[error("signal too short: {len} samples, window needs {win_len}")]
    SignalTooShort { len: usize, win_len: usize },

    #[error("inconsistent spectrogram metadata: {0}")]
    Metadata(String),

    #[error("every frame was discarded as silence")]
    AllFramesSilent,

    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt payload: {0}")]
    CorruptPayload(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
