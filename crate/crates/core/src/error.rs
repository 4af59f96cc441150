use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("singular channel matrix (|det| = {det:e})")]
    SingularChannel { det: f64 },
    #[error("harmonic order {0} is not supported here")]
    UnsupportedOrder(i32),
    #[error("ratio is undefined: ideal coefficient vanishes at Δφ = {delta_phi}, l = {order}")]
    UndefinedRatio { delta_phi: f64, order: i32 },
    #[error("target amplitude {target} exceeds the reachable maximum {max}")]
    Unreachable { target: f64, max: f64 },
    #[error("root finder did not converge after {0} iterations")]
    Convergence(usize),
    #[error("circular shift {t0_frac} Ts is not a multiple of Ts/{steps}")]
    UnrepresentableShift { t0_frac: f64, steps: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user input (files, configuration), as
    /// opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Config(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
