use thiserror::Error;

/// Errors surfaced by graph loading, index io, and parameter validation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid edge ({upper}, {lower}): {msg}")]
    InvalidEdge { upper: u32, lower: u32, msg: String },

    #[error("edge {edge} already deleted")]
    AlreadyDeleted { edge: u32 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("incompatible index file: {0}")]
    IncompatibleIndex(String),

    #[error("corrupt index file: {0}")]
    Corrupt(String),
}

pub type Result<T> = std::result::Result<T, Error>;
