use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("nonpositive quadratic form dᵀ∇²f d = {0:e}")]
    NonPositiveCurvature(f64),
    #[error("curvature breakdown: yᵀs = {y_dot_s:e} with ‖y‖‖s‖ = {scale:e}")]
    CurvatureBreakdown { y_dot_s: f64, scale: f64 },
    #[error("inconsistent constants: α = {alpha} exceeds 1, L is below the local curvature")]
    InconsistentConstants { alpha: f64 },
    #[error("line search failed after {probes} probes (last t = {t:e})")]
    LineSearchFailure { probes: usize, t: f64 },
    #[error("argument {name} = {value} outside domain {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("reference solve did not reach tolerance: ‖g‖ = {grad_norm:e}, best f = {best_f}")]
    ReferenceNotConverged { best_f: f64, grad_norm: f64 },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
