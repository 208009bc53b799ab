use alloc::string::String;
use alloc::vec::Vec;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{function} failed to converge after {iterations} iterations")]
    Convergence {
        function: &'static str,
        iterations: usize,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("design matrix {matrix} is rank deficient ({rank} of {cols} columns independent)")]
    RankDeficient {
        matrix: &'static str,
        rank: usize,
        cols: usize,
    },

    #[error("maximum likelihood fit did not converge after {iterations} iterations (max |score| = {max_score:e})")]
    FitNonConvergence {
        iterations: usize,
        max_score: f64,
        last_iterate: Vec<f64>,
    },

    #[error("observed information matrix is not positive definite")]
    SingularInformation,

    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("simulation failed: {failed} of {attempted} replications could not be fitted")]
    Simulation { failed: u64, attempted: u64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}
