use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on the arguments was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive quadrature hit its subdivision depth before meeting tolerance.
    #[error("quadrature did not converge (partial value {partial:e}, last block size {block:e})")]
    NonConvergence { partial: f64, block: f64 },

    /// A search bracket kept expanding without enclosing the target.
    #[error("search bracket escaped after {doublings} doublings")]
    BracketEscaped { doublings: u32 },

    /// The input function is bounded, so no witness weight is needed.
    #[error("bounded input: the distribution vanishes at t = {at}")]
    BoundedInput { at: f64 },

    /// A post-hoc contract check of a construction failed.
    #[error("contract violated: {0}")]
    Contract(String),

    /// A family member has an infinite Orlicz norm.
    #[error("not in the Orlicz space: infinite norm at family parameters {parameters:?}")]
    NotInOrliczSpace { parameters: Vec<f64> },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::BracketEscaped { .. } | Error::Contract(_)
        )
    }
}
