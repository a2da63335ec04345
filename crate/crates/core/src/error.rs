use thiserror::Error;

/// Library-wide error type.
///
/// `Domain` marks parameter-range violations (wrong p-range, nonpositive
/// scalars), `DegenerateInput` marks structurally invalid inputs (mass
/// mismatch, zero function where a nonzero one is required, violated sign
/// hypotheses), `Configuration` marks inconsistent run setups (overlapping
/// bumps, bad grids), and `Numerical` carries diagnostics from iterations
/// that failed to reach their target.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("numerical failure: {context} (residual {residual:.3e}, {iterations} iterations)")]
    Numerical {
        context: String,
        residual: f64,
        iterations: usize,
    },

    /// The requested Nehari component is empty across the whole trial set.
    #[error("empty Nehari component: {0}")]
    EmptyNehari(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        CoreError::DegenerateInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CoreError::Configuration(msg.into())
    }
}
