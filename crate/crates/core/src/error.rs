use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain the routine is defined on.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// The Mittag-Leffler series grew past f64 range (large positive argument).
    #[error("overflow evaluating {0}")]
    Overflow(String),

    /// |E(-z)|(1+|z|) exceeded the calibrated envelope constant.
    #[error("envelope violated: (1+|z|)|E| = {scaled} > M = {bound} at mu={mu}, eta={eta}, z={z}")]
    EnvelopeViolation {
        mu: f64,
        eta: f64,
        z: f64,
        scaled: f64,
        bound: f64,
    },

    #[error("requested {requested} modes but only {available} kernel eigenvalues are above the cutoff")]
    InsufficientModes { requested: usize, available: usize },

    #[error("mode {mode} out of range (basis holds {count})")]
    ModeOutOfRange { mode: usize, count: usize },

    /// Some mode has Delta(n) = 0 while the data is not orthogonal to X_n.
    #[error("unsolvable instance: resonant modes {modes:?} have nonzero Fourier coefficients")]
    Unsolvable { modes: Vec<usize> },

    #[error("config error: {0}")]
    Config(String),

    #[error("field/config mismatch: {0}")]
    Mismatch(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unsolvable { .. } => 2,
            Error::Config(_) | Error::Domain(_) | Error::InsufficientModes { .. } => 3,
            _ => 1,
        }
    }

    /// Short machine-readable tag for the one-line error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NonFinite(_) => "non-finite",
            Error::Overflow(_) => "overflow",
            Error::EnvelopeViolation { .. } => "envelope",
            Error::InsufficientModes { .. } => "insufficient-modes",
            Error::ModeOutOfRange { .. } => "mode-range",
            Error::Unsolvable { .. } => "unsolvable",
            Error::Config(_) => "config",
            Error::Mismatch(_) => "mismatch",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
