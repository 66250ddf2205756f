use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("unsupported weight system {0:?}: weights must be all even or all equal to one")]
    UnsupportedWeights(Vec<u32>),

    #[error("model violates degree constraints: {0}")]
    DegreeConstraint(String),

    #[error("truncation overflow: {0}")]
    Truncation(String),

    #[error("not divisible by (1-zeta)^{order}: remainder {remainder:.3e}")]
    NotDivisible { order: u32, remainder: f64 },

    #[error("index undefined: function nearly vanishes on the circle (min |f| = {0:.3e})")]
    IndexUndefined(f64),

    #[error("insufficient sampling resolution: {0}")]
    Resolution(String),

    #[error("input is not real-valued: {0}")]
    NotReal(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("disc boundary not generic for P: {0}")]
    NonGeneric(String),

    #[error("matrix loop is singular on the circle: {0}")]
    Singular(String),

    #[error("partial index recovery failed; increase the polynomial degree or sampling: {0}")]
    IndexRecovery(String),

    #[error("factorization unstable at current truncation: {0}")]
    FactorizationUnstable(String),

    #[error("numerical rank is ambiguous; increase N_F: {0}")]
    RankAmbiguous(String),

    #[error("Newton iteration failed, start is outside the convergence neighborhood; reduce t: {0}")]
    NoConvergence(String),

    #[error("Jacobian rank collapsed, admissibility lost along the path: {0}")]
    RankCollapse(String),

    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error stems from bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::InvalidPolynomial(_)
                | Error::UnsupportedWeights(_)
                | Error::DegreeConstraint(_)
                | Error::InvalidDeformation(_)
                | Error::InvalidArgument(_)
                | Error::NotReal(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
