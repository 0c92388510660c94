use alloc::string::String;

/// Crate-wide error type. Variants mirror the failure classes of the public
/// operations: bad arguments, inconsistent configuration, resource guards and
/// numerical breakdown during elimination.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numerical breakdown at node {node}: {msg}")]
    Breakdown { node: usize, msg: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("regime boundary: {0}")]
    Boundary(String),
}

pub type Result<T> = core::result::Result<T, Error>;
