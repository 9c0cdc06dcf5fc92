use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("stream underflow: frame needs {needed} samples, {available} available")]
    Underflow { needed: usize, available: usize },

    #[error("resampling ratio {0} outside the supported range 1 +/- 1e-3")]
    RatioOutOfRange(f64),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("speech material too short: need {needed} samples, got {available}")]
    MissingSpeech { needed: usize, available: usize },

    #[error("noise covariance is not positive definite after diagonal loading")]
    SingularCovariance,

    #[error("degenerate generalized eigenvalue: {0}")]
    DegenerateEigenvalue(f64),

    #[error("clock model violated: {0}")]
    Consistency(String),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
