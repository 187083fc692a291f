use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("singular expression: {0}")]
    Singular(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(
        "fit did not converge after {iterations} iterations \
         (last iterate: i0={i0}, x_i={x_i}, baseline={baseline})"
    )]
    NonConvergence {
        iterations: usize,
        i0: f64,
        x_i: f64,
        baseline: f64,
    },

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("malformed stack file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
