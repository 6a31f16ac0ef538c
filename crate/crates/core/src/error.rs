use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contractions {left} and {right} overlap: S_{left}(1) = {end} > S_{right}(0) = {start}")]
    Overlap {
        left: usize,
        right: usize,
        end: f64,
        start: f64,
    },
    #[error("invalid weights: {0}")]
    Weight(String),
    #[error("images do not cover the endpoints: {0}")]
    Coverage(String),
    #[error("invalid contraction {index}: {reason}")]
    Contraction { index: usize, reason: String },
    #[error("enumeration of {what} would exceed the cap of {cap} elements")]
    Size { what: &'static str, cap: usize },
    #[error("point {x} is not in the support at resolution {level}")]
    NotInSupport { x: f64, level: usize },
    #[error("nodes {index} and {} coincide at {x}", index + 1)]
    DegenerateGap { index: usize, x: f64 },
    #[error("tridiagonal eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    Convergence { index: usize, iterations: usize },
    #[error("singular system at row {row} (pivot {pivot})")]
    Singular { row: usize, pivot: f64 },
    #[error("non-finite solution value on path {path} at step {step}")]
    Blowup { path: usize, step: usize },
    #[error("Picard iteration did not reach tolerance after {iterations} iterations (last difference {last_difference})")]
    NoConvergence {
        iterations: usize,
        last_difference: f64,
        contraction_estimates: Vec<f64>,
    },
    #[error("need at least {needed} scales for a regression, found {found}")]
    InsufficientScales { found: usize, needed: usize },
    #[error("horizon too short: {0}")]
    InsufficientHorizon(String),
    #[error("moment order q = {q} is not above the threshold {threshold}")]
    Threshold { q: f64, threshold: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
