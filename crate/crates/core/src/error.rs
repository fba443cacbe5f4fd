use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 8")]
    InvalidGridSize(usize),

    #[error("expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids (n={0} vs n={1})")]
    GridMismatch(usize, usize),

    #[error("invalid dyadic range [{j_min}, {j_max}]: {reason}")]
    InvalidPartition { j_min: i32, j_max: i32, reason: String },

    #[error("block index {j} outside partition range [{j_min}, {j_max}]")]
    BlockOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("Lebesgue exponent must be >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("(epsilon={epsilon}, r={r}) is not an admissible pair")]
    InadmissiblePair { epsilon: f64, r: f64 },

    #[error("CFL violation at t={t}: dt={dt} exceeds admissible {admissible}")]
    Cfl { t: f64, dt: f64, admissible: f64 },

    #[error("non-finite value detected at t={t}")]
    NonFinite { t: f64 },

    #[error("blow-up guard tripped at t={t}: sup|u| grew by a factor {growth:.3e}")]
    BlowUp { t: f64, growth: f64 },

    #[error("band overflow: {0}")]
    BandOverflow(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config error{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("run stopped after {0} snapshots on request")]
    Interrupted(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures of the time integration itself, as opposed to bad input or
    /// I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Cfl { .. } | Error::NonFinite { .. } | Error::BlowUp { .. })
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
