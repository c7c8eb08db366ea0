use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("point {point} lies on the support [{a}, {b}]")]
    OnSupport { point: String, a: String, b: String },
    #[error("quadrature construction failed: {0}")]
    Quadrature(String),
    #[error("measure {tag} is not one-signed")]
    SignChange { tag: String },
    #[error("singular linear system ({0})")]
    Singular(String),
    #[error("system for n={n} has {rows} rows but degree {degree}")]
    NotSquare { n: u64, rows: usize, degree: usize },
    #[error("{what}: residual {residual} exceeds tolerance {tolerance}")]
    Residual { what: String, residual: f64, tolerance: f64 },
    #[error("a_{n} = {value} is not positive")]
    NonPositive { n: u64, value: f64 },
    #[error("psi_({n},{k}) has {found} sign changes on its interval, expected {expected}")]
    ZeroCount { n: u64, k: usize, found: usize, expected: usize },
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("branching combinatorics mismatch: {0}")]
    Combinatorics(String),
    #[error("sheet assignment ambiguous near {0}")]
    Ambiguous(String),
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error("sign mismatch: {0}")]
    Sign(String),
    #[error("identity violated: {0}")]
    Identity(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
