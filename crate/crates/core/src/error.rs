use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tensor order {order} is unsupported (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("cannot contract an order-{order} tensor {times} time(s)")]
    OrderUnderflow { order: usize, times: usize },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid polarized ray: {0}")]
    InvalidRay(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("boundary ring carries {ratio:.3e} of the peak value (gate {gate:.1e})")]
    DecayGate { ratio: f64, gate: f64 },

    #[error("frequency y = 0 has no pointwise split")]
    ZeroFrequency,

    #[error("direction vector must be nonzero")]
    ZeroDirection,

    #[error("field kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: String, got: String },

    #[error("mean-zero precondition violated (tolerance {tol:.1e}): {}", format_means(.means))]
    MeanNotZero { means: Vec<(String, f64)>, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_means(means: &[(String, f64)]) -> String {
    means
        .iter()
        .map(|(name, m)| format!("{name}={m:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}
