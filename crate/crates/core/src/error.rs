use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the FSI pipeline.
///
/// Variants carry the module that produced them so that CLI messages can be
/// tagged without extra context.
#[derive(Debug, Error)]
pub enum FsiError {
    #[error("mesh: refinement level {level} overflows the index type")]
    LevelTooLarge { level: u32 },

    #[error("mesh: I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("mesh: malformed file {path}, line {line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("fem: form {form} requires a {expected} triangle, triangle {triangle} is {found}")]
    RegionMismatch {
        form: &'static str,
        expected: &'static str,
        found: &'static str,
        triangle: usize,
    },

    #[error("fem: invalid material parameters: {0}")]
    InvalidParams(String),

    #[error("sparse: dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sparse: matrix is singular to tolerance at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("sparse: relative residual {residual:e} exceeds {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("sparse: eigen-iteration did not converge after {iterations} iterations (residual {residual:e}, estimate {value:e})")]
    EigenNotConverged {
        iterations: usize,
        residual: f64,
        value: f64,
        vector: Vec<f64>,
    },

    #[error("solver: {0}")]
    Contract(String),

    #[error("analysis: coefficient mismatch in {polynomial} at degree {degree}: printed {printed}, formal derivative {expected}")]
    CoefficientMismatch {
        polynomial: &'static str,
        degree: usize,
        printed: String,
        expected: String,
    },

    #[error("analysis: level {level} failed: {source}")]
    Level {
        level: u32,
        #[source]
        source: Box<FsiError>,
    },
}

pub type Result<T> = std::result::Result<T, FsiError>;
