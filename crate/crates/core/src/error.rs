use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("supercritical coupling rejected: lambda = {lambda} < lambda_star = {lambda_star}")]
    Supercritical { lambda: f64, lambda_star: f64 },
    #[error("Bessel order {0} unsupported (0 <= nu <= 50 required)")]
    UnsupportedOrder(f64),
    #[error("grid/operator mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite multiplier value at k = {0}")]
    NonFiniteMultiplier(f64),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("resolution exhausted: {0}")]
    ResolutionExhausted(String),
    #[error("resolution guard tripped: {reason}; need M >= {needed_m}")]
    ResolutionGuard { reason: String, needed_m: usize },
    #[error("unsupported kind: {0}")]
    UnsupportedKind(String),
    #[error("not applicable at alpha = {0}: seminorm diverges")]
    NotApplicable(f64),
    #[error("scan inconclusive at every alpha; increase t_max or R")]
    AllInconclusive,
    #[error("fit degenerate: {0}")]
    DegenerateFit(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
