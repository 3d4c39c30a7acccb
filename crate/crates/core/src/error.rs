use thiserror::Error;

/// Errors shared across the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix numerically singular (condition estimate {cond:.3e} > {limit:.1e}); consider a ridge t > 0")]
    Singular { cond: f64, limit: f64 },

    #[error("exactly singular matrix: zero pivot at step {step}")]
    ZeroPivot { step: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("branch selection failed: {0}")]
    Branch(String),

    #[error("moment of order {k} diverges for this law")]
    DivergentMoment { k: usize },

    #[error("measure is not symmetric: {0}")]
    Symmetry(String),

    #[error("singular value below representable range; log potential is -inf")]
    LogSingular,

    #[error("oscillating continuation toward y = 0: value hull [{lo:.6e}, {hi:.6e}]")]
    OscillatingLimit { lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
