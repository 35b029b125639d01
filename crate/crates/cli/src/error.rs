use std::path::PathBuf;

use spinpair::seq::ParseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },

    #[error("{0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 0 success, 1 validation, 2 parse, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Parse { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<spinpair::Error> for CliError {
    fn from(e: spinpair::Error) -> Self {
        use spinpair::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::PseudoPureWeight(_)
            | E::RateMatrixNotPositive { .. }
            | E::Nyquist { .. }
            | E::SpectralRange { .. } => CliError::Validation(e.to_string()),
            E::NotHermitian { .. }
            | E::BadTrace { .. }
            | E::NotPositive { .. }
            | E::UndefinedRate
            | E::FitDomain(_)
            | E::Numerical(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
