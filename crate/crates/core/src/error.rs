use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size cap exceeded: requested 2^{requested} > 2^{cap}")]
    SizeCap { requested: u32, cap: u32 },
    #[error("Paley index {k} (m = {m}) not representable on 2^{n} bins")]
    NotRepresentable { k: u64, m: u32, n: u32 },
    #[error("Rabi rate {rate} exceeds limit {limit} in segment {segment}")]
    RabiLimit { segment: usize, rate: f64, limit: f64 },
    #[error("unsupported gate kind: {0}")]
    UnsupportedKind(String),
    #[error("frequency grid error: {0}")]
    Grid(String),
    #[error("band error: {0}")]
    Band(String),
    #[error("filter function underflows to zero in band [{lo:e}, {hi:e}]")]
    Underflow { lo: f64, hi: f64 },
    #[error("noise support up to {cutoff:e} exceeds frequency grid maximum {grid_max:e}")]
    SupportCoverage { cutoff: f64, grid_max: f64 },
    #[error("step size error: {0}")]
    StepSize(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
