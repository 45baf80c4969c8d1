use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid joint table: {0}")]
    InvalidTable(String),

    #[error("joint table line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The certificate ratio is infinite: a joint tail is positive where the
    /// product of marginal tails vanishes.
    #[error("not END: joint {side} tail {joint} > 0 where the marginal product is 0 at {thresholds:?}")]
    NotEnd {
        side: &'static str,
        joint: f64,
        thresholds: Vec<f64>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("not computable: {0}")]
    NotComputable(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("invalid plan: {0}")]
    Plan(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
