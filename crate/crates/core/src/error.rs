use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not a supported prime (need a prime below 256)")]
    NotPrime(u32),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("entry {value} is not a residue modulo {modulus}")]
    InvalidResidue { value: u32, modulus: u32 },

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid net: {0}")]
    InvalidNet(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tail of the truncation sum is not summable: {0}")]
    UnsummableTail(String),

    #[error("frequency box too large: |r|_1 = {r1}, limit {limit}")]
    BoxTooLarge { r1: u32, limit: u32 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::OutOfRange {
            what,
            detail: detail.into(),
        }
    }
}
