use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("density matrix is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("pseudo-pure weight {0} outside [-1/3, 1]")]
    PseudoPureWeight(f64),

    #[error("rate matrix is not positive definite (eigenvalues {eigenvalues:?})")]
    RateMatrixNotPositive { eigenvalues: [f64; 3] },

    #[error("initial two-spin correlation is zero; initial rate undefined")]
    UndefinedRate,

    #[error("dwell {dwell} s violates the Nyquist limit {limit} s for the J doublet")]
    Nyquist { dwell: f64, limit: f64 },

    #[error("spectral window ±{needed_hz} Hz not covered (grid spans {min_hz} .. {max_hz} Hz)")]
    SpectralRange {
        needed_hz: f64,
        min_hz: f64,
        max_hz: f64,
    },

    #[error("fit domain: {0}")]
    FitDomain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
