use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("infeasible configuration: {total} encoded rows exceed capacity {capacity}")]
    InfeasibleConfiguration { total: usize, capacity: usize },

    #[error("level {level} is outside 1..={workers}")]
    LevelOutOfRange { level: usize, workers: usize },

    #[error("oracle instance too large: L={workers}, k={rows} (limits L<={max_workers}, k<={max_rows})")]
    OracleGuard {
        workers: usize,
        rows: usize,
        max_workers: usize,
        max_rows: usize,
    },

    #[error("generator ({rows_in} -> {rows_out}) failed the MDS self-check")]
    NotMds { rows_in: usize, rows_out: usize },

    #[error("invalid generator shape: {rows_in} -> {rows_out}")]
    GeneratorShape { rows_in: usize, rows_out: usize },

    #[error("cannot place remainder block of level {level} without exceeding {capacity} rows per worker")]
    PackingFailure { level: usize, capacity: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("insufficient results for level {level} block {block}: need {needed}, have {available}")]
    InsufficientResults {
        level: usize,
        block: usize,
        needed: usize,
        available: usize,
    },

    #[error("duplicate or unknown worker {0} in result set")]
    BadWorker(usize),

    #[error("singular system while decoding level {level} block {block}")]
    SingularDecode { level: usize, block: usize },

    #[error("rank {rank} outside 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid latency model: {0}")]
    InvalidLatency(String),

    #[error("unsupported latency model for this operation: {0}")]
    UnsupportedModel(&'static str),

    #[error("reference solver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
