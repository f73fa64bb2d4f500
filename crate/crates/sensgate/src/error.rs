use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An index is out of range for the table it addresses.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// Input values are outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An API contract was violated by the caller.
    #[error("contract error: {0}")]
    Contract(String),

    /// An object was used in a state that does not permit the operation.
    #[error("state error: {0}")]
    State(String),

    /// Invalid configuration or mismatched artifacts.
    #[error("configuration error: {0}")]
    Config(String),

    /// A file could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Training produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: configuration problems exit 2,
    /// everything else exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } => 2,
            _ => 1,
        }
    }
}
