use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("system size {n} is below the minimum {min} for this model family")]
    SystemTooSmall { n: usize, min: usize },

    #[error("system size {n} exceeds the dense cap of {cap} spins")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("invalid Pauli term: {0}")]
    InvalidTerm(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("schedule shape mismatch: expected {expected_p}x{expected_m}, found {found_p}x{found_m}")]
    ShapeMismatch {
        expected_p: usize,
        expected_m: usize,
        found_p: usize,
        found_m: usize,
    },

    #[error("cost kind {0} requires a target that was not supplied")]
    MissingTarget(&'static str),

    #[error("spectrum width E_max - E_min is zero; relative energy is undefined")]
    DegenerateWidth,

    #[error("invalid bipartition: cut {cut} for {n} spins")]
    InvalidCut { cut: usize, n: usize },

    #[error("magnetization sector m={m} is empty for {n} spins")]
    EmptySector { n: usize, m: i32 },

    #[error("spectrum has no weight")]
    EmptySpectrum,

    #[error("infeasible total-time budget {0}")]
    InfeasibleBudget(f64),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit status used by the command-line frontend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Json(_) => 2,
            Error::Io { .. } => 4,
            Error::SystemTooSmall { .. }
            | Error::DenseCapExceeded { .. }
            | Error::InvalidTerm(_)
            | Error::InvalidCut { .. }
            | Error::EmptySector { .. }
            | Error::InfeasibleBudget(_)
            | Error::ShapeMismatch { .. }
            | Error::MissingTarget(_) => 2,
            Error::DimensionMismatch { .. }
            | Error::DegenerateWidth
            | Error::EmptySpectrum
            | Error::Numeric(_) => 3,
        }
    }

    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "numeric",
            _ => "io",
        }
    }
}
