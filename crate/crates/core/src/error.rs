use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter length mismatch: expected {expected}, got {got}")]
    ParamLength { expected: usize, got: usize },
    #[error("imbalance ratio {0} must lie strictly inside (0, 1)")]
    ImbalanceRatio(f64),
    #[error("auxiliary variable {name}={value} outside its domain")]
    AuxDomain { name: &'static str, value: f64 },
    #[error("{0} class is empty")]
    EmptyClass(&'static str),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("invalid dataset: {0}")]
    Dataset(String),
}
