use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation requires n > 2s.
    #[error("regime error: operation requires n > 2s, got n = {n}, s = {s}")]
    Regime { n: u32, s: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("grid mismatch: function has {got} nodes, operator expects {expected}")]
    GridMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("newton iteration did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence {
        iters: usize,
        residual: f64,
        /// Last iterate: nodal values followed by lambda.
        last_iterate: Vec<f64>,
    },

    #[error("infeasible solution: lambda = {lambda} is not positive")]
    Infeasible { lambda: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("branch tracing stopped at peak {peak}: {source}")]
    Branch {
        peak: f64,
        #[source]
        source: Box<Error>,
        partial: Box<crate::gelfand::Branch>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
