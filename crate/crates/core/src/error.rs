use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of the Gamma function at {0}")]
    Pole(f64),
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("series failed to converge: {0}")]
    Convergence(String),
    #[error("integral diverges: {0}")]
    Divergence(String),
    #[error("operation undefined in this regime: {0}")]
    Regime(String),
    #[error("singular point: {0}")]
    Singularity(String),
    #[error("Green function is singular on the diagonal")]
    DiagonalSingularity,
    #[error("quadrature budget of {nodes} nodes exhausted (error estimate {estimate:e})")]
    BudgetExceeded { nodes: usize, estimate: f64 },
    #[error("integrand returned a non-finite value at {0}")]
    NonFiniteSample(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
