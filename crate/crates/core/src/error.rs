use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid axis spec: {0}")]
    InvalidSpec(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("boundary leakage: edge magnitude {edge:e} exceeds {limit:e} relative to peak")]
    BoundaryLeakage { edge: f64, limit: f64 },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: `{expr}` is not finite at q = {q}, p = {p}")]
    Domain { expr: String, q: f64, p: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("polynomial degree {degree} exceeds the maximum of {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("realness violation: discarded imaginary part {0:e}")]
    Realness(f64),

    #[error("1-form is not closed: max |d xi| = {0:e}")]
    NotClosed(f64),

    #[error("path point ({q}, {p}) lies outside the grid")]
    PathOutOfDomain { q: f64, p: f64 },

    #[error("potential is not confining: {0}")]
    NonConfining(String),

    #[error("`{0}` grows at the grid edge; spectral differentiation is not permitted")]
    NonPeriodicGradient(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
