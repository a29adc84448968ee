use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor precondition was violated; names the offending field.
    #[error("domain error on `{field}`: {msg}")]
    Domain { field: &'static str, msg: String },

    #[error("index out of extent: {0}")]
    Index(String),

    #[error("pullback exits the source grid: {0}")]
    Extent(String),

    #[error("solver did not converge after {iters} iterations (last residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no sign change in bracket: {0}")]
    Bracket(String),

    #[error("flatness hypothesis violated: {0}")]
    FlatnessViolation(String),

    #[error("finite-difference step underflow: {0}")]
    StepUnderflow(String),

    #[error("gauge budget infeasible: {0}")]
    BudgetInfeasible(String),

    #[error("insufficient usable scales: {0}")]
    InsufficientScales(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad field dump: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { field, msg: msg.into() }
    }
}
