use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("unsupported modulus {0}: closed forms are proven only for m = 2^r (r >= 1) and odd primes m = p")]
    UnsupportedModulus(u64),

    #[error("invalid walk configuration: {0}")]
    Config(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("counter overflow in {0}")]
    Overflow(&'static str),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("empty accumulator")]
    Empty,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
