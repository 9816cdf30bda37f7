use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inputs violate a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// Weighted Gram matrix could not be factored.
    #[error("singular weighted Gram matrix (condition estimate {condition:.3e})")]
    SingularGram { condition: f64 },

    #[error("filter diverged: removed weight {removed:.4} exceeds limit {limit:.4}")]
    FilterDiverged { removed: f64, limit: f64 },

    #[error("corruption covariance not PSD (eps*kappa = {eps_kappa:.6} < 1 - eps = {bound:.6})")]
    NotPsd { eps_kappa: f64, bound: f64 },

    #[error("mu_s outside achievable range: {0}")]
    MuOutOfRange(f64),

    #[error("c1 too large: normalizer {normalizer:.9} exceeds 1/(1-eps) = {limit:.9}")]
    C1TooLarge { normalizer: f64, limit: f64 },

    #[error("variance >= 2: chi-square divergence is infinite")]
    InfiniteDivergence,

    #[error("rejection sampler acceptance rate {rate:.4} below 1%")]
    LowAcceptance { rate: f64 },

    #[error("quadrature did not converge: estimated error {error:.3e} after {intervals} subintervals")]
    Quadrature { error: f64, intervals: usize },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
