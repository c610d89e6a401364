use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("measures live on different grids")]
    GridMismatch,

    #[error("quadrature produced a non-finite value at sigma = {sigma}")]
    NonFinite { sigma: f64 },

    #[error("normalization constant underflowed")]
    Underflow,

    #[error("mean {mean} is outside the attainable range (-{limit}, {limit})")]
    BracketFailure { mean: f64, limit: f64 },

    #[error("g(m) = mean(J m) - m changes sign {0} times on (0, m_max]; expected at most one")]
    CriticalPointStructure(usize),

    #[error("the potential admits no positive critical point (m* does not exist)")]
    NoSymmetryBreaking,

    #[error("Fokker-Planck step failed: {0}")]
    StepFailed(String),

    #[error("JKO inner solver did not converge after {iterations} iterations (residual {residual:e})")]
    JkoNotConverged { iterations: usize, residual: f64 },

    #[error("particle {index} left the finite range at t = {t}")]
    ParticleBlowUp { index: usize, t: f64 },

    #[error("no settle time found before t_max = {t_max}")]
    CertificateUnavailable { t_max: f64 },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
