use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("message index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("enumeration budget exceeded: {what} needs {required} outcomes, limit is {limit}")]
    BudgetExceeded { what: String, required: u128, limit: u64 },

    #[error("spectrum has {atoms} atoms, above the cap of {cap}; use Monte Carlo estimation instead")]
    SpectrumTooLarge { atoms: usize, cap: usize },

    #[error("capacity iteration did not converge after {iterations} iterations (bracket [{lower}, {upper}])")]
    NoConvergence { iterations: usize, lower: f64, upper: f64 },

    #[error("no positive secrecy rate at this input (gap = {gap})")]
    NoSecrecyGap { gap: f64 },

    #[error("rate tuple violates the {constraint} constraint: {detail}")]
    RateViolation { constraint: &'static str, detail: String },

    #[error("missing certificate: {0}")]
    MissingCertificate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
