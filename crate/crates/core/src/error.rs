use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("wrong exponent regime: {0}")]
    Regime(String),

    #[error("unsupported operation: {0}")]
    Capability(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("evaluation at a singular point: {0}")]
    SingularPoint(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("bad configuration: {0}")]
    Configuration(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("non-finite value at quadrature node {index}")]
    NonFinite { index: usize },

    #[error("trajectory diverged at t = {t}: |v| = {norm} exceeds the guard {guard}")]
    Divergence {
        t: f64,
        norm: f64,
        guard: f64,
        /// Last state that passed the guard, laid out as `[v, dv]`.
        last_state: Vec<f64>,
    },

    #[error("inadmissible invariants: {0}")]
    Inadmissible(String),

    #[error("inconsistent evidence: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Range(_) => "range",
            Error::Regime(_) => "regime",
            Error::Capability(_) => "capability",
            Error::Domain(_) => "domain",
            Error::SingularPoint(_) => "singular_point",
            Error::Validation(_) => "validation",
            Error::Configuration(_) => "configuration",
            Error::Numeric(_) => "numeric",
            Error::NonFinite { .. } => "non_finite",
            Error::Divergence { .. } => "divergence",
            Error::Inadmissible(_) => "inadmissible",
            Error::Inconsistent(_) => "inconsistent",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
