use thiserror::Error;

/// Errors produced by dataset loading, tree building, and querying.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input data. `row` is 1-based and counts the header.
    #[error("format error at row {row}: {msg}")]
    Format { row: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A query referenced an attribute or value outside the schema. Distinct
    /// from a legitimate count of zero.
    #[error("invalid query: {0}")]
    Query(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A serialized tree does not match the dataset it was asked to attach to.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("result too large: {0}")]
    Size(String),
}

pub type Result<T> = std::result::Result<T, Error>;
