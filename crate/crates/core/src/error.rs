use thiserror::Error;

/// Errors raised by filter design, transforms and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero polynomial has no roots")]
    ZeroPolynomial,

    #[error("root finding did not converge (reconstruction residual {residual:.3e})")]
    RootsNotConverged { residual: f64 },

    #[error("symbol is not a valid spectral-factorization input: {0}")]
    NotFactorizable(String),

    /// The halfband symbol dips below zero on the unit circle, so no real
    /// spectral factor exists for this parameter choice.
    #[error("infeasible spectral factorization: symbol minimum {min:.3e} on the unit circle")]
    Infeasible { min: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice factorization failed (residual {residual:.3e})")]
    FactorizationFailed { residual: f64 },

    #[error("cascade iteration diverged (max |phi| = {max:.3e}); filter is not regular")]
    NonRegular { max: f64 },

    #[error("correlation functions need an even number of observables, got {0}")]
    OddObservableCount(usize),

    #[error("symbol blocks are defined on different site lists")]
    MismatchedSites,

    #[error("box size {size} exceeds the supported maximum {max}")]
    BoxTooLarge { size: usize, max: usize },

    #[error("coefficients are not real (max imaginary part {max_imag:.3e})")]
    NotReal { max_imag: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
