use thiserror::Error;

/// Errors surfaced by tensor, process, projection and oracle operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a structural precondition (shape, range, subset).
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or process definition fails validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// A conditional was requested where the conditioning mass vanishes.
    #[error("singular conditioning: zero mass at {0}")]
    SingularConditioning(String),

    /// KL(p‖q) with p > 0 on a cell where q = 0.
    #[error("infinite KL divergence: p{cell} = {p_value:e} but q{cell} = 0")]
    InfiniteDivergence { cell: String, p_value: f64 },

    /// Requested tensor exceeds the configured entry budget.
    #[error("tensor budget exceeded: {0}")]
    BudgetExceeded(String),

    /// An iterative solver hit its iteration cap before reaching tolerance.
    #[error("{what} did not converge within {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
