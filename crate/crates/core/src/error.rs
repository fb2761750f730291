use thiserror::Error;

/// Errors raised by the linear-algebra substrate, the range computations and
/// the planners.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("size limit exceeded: {requested} > {cap}")]
    SizeLimit { requested: usize, cap: usize },

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition not met: {0}")]
    Domain(String),

    #[error("operator is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("{what} did not converge (best residual {best_residual:e})")]
    Convergence { what: String, best_residual: f64 },

    #[error("operators are identical up to a global phase")]
    IdenticalUpToPhase,

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("scheme validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("internal contradiction: {0}")]
    Contradiction(String),

    #[error("planner failed at stage `{stage}`: {source}")]
    Planner {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: &str) -> Error {
        match self {
            e @ Error::Planner { .. } => e,
            e => Error::Planner { stage: stage.to_string(), source: Box::new(e) },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
