use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex count {n} is invalid: {reason}")]
    InvalidVertexCount { n: usize, reason: &'static str },

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("edge list parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {vertex} is not on the expected side of the cut")]
    SideViolation { vertex: usize },

    #[error("vertex {vertex} listed more than once")]
    DuplicateVertex { vertex: usize },

    #[error("exchange sets have unequal sizes ({left} vs {right})")]
    UnequalExchange { left: usize, right: usize },

    #[error("cut covers {got} vertices but the graph has {expected}")]
    CutSizeMismatch { expected: usize, got: usize },

    #[error("graph with {n} vertices exceeds the exact solver limit of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("border graph is invalid: {0}")]
    InvalidBorderGraph(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
