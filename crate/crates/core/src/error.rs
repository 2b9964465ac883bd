use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// An operation was called outside its mathematical domain.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A run produced a non-positive or non-finite state variable.
    #[error("simulation failed at day {day}, agent {agent}: {reason}")]
    Simulation {
        day: u32,
        agent: usize,
        reason: String,
    },

    /// Nonlinear least squares did not reach the convergence criterion.
    #[error("fit did not converge: {0}")]
    FitDidNotConverge(String),

    /// Input data unsuitable for the requested statistic.
    #[error("degenerate input for {op}: {reason}")]
    Degenerate { op: &'static str, reason: String },

    /// Configuration file problem, with the offending field path.
    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 validation, 2 runtime, 3 fit.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParam { .. }
            | Error::Domain { .. }
            | Error::Degenerate { .. }
            | Error::Config { .. }
            | Error::Parse { .. } => 1,
            Error::Simulation { .. } | Error::Io { .. } => 2,
            Error::FitDidNotConverge(_) => 3,
        }
    }
}
