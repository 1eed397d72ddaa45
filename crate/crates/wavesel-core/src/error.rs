use thiserror::Error;

/// Errors produced by solvers, calibration, and the regression stack.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Newton iteration failed to converge, even after step halving.
    #[error("solver failed to converge: {0}")]
    NonConvergence(String),

    /// An input value is outside the supported domain.
    #[error("domain error: {0}")]
    DomainError(String),

    /// The stimulus description is inconsistent (non-positive step, duration
    /// shorter than the pulse, ...).
    #[error("invalid stimulus: {0}")]
    InvalidStimulus(String),

    /// The moving-average window does not fit inside the trace.
    #[error("averaging window {window_s} s exceeds trace duration {duration_s} s")]
    WindowTooLarge { window_s: f64, duration_s: f64 },

    /// A trace with fewer than two usable samples was handed to the feature
    /// extractor.
    #[error("empty trace: {0}")]
    EmptyTrace(String),

    /// Train/test split sizes do not add up to the dataset size.
    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    /// Ridge with lambda = 0 on a rank-deficient design matrix.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// All truth values are identical, so R^2 is undefined.
    #[error("degenerate truth: all target values identical")]
    DegenerateTruth,

    /// Feature vector length does not match the model.
    #[error("dimension mismatch: model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// No resistance in the search bracket reproduces a calibration target.
    #[error("calibration failure: {0}")]
    CalibrationFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
