//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("aliasing: {samples} samples cannot resolve {modes} modes (need at least 2M+1 = {})", 2 * .modes + 1)]
    Aliasing { samples: usize, modes: usize },

    #[error("coefficients violate Hermitian symmetry by {asymmetry:.3e} (tolerance {tol:.1e})")]
    NotReal { asymmetry: f64, tol: f64 },

    #[error("mode count mismatch: {left} vs {right}")]
    ModeMismatch { left: usize, right: usize },

    #[error("unknown map family `{0}`")]
    UnknownFamily(String),

    #[error("map family `{family}`: {reason}")]
    BadMapParams { family: String, reason: String },

    #[error("map `{name}` fails validation: {reason}")]
    MapValidation { name: String, reason: String },

    #[error("probability vector sums to {sum} (must be 1 within 1e-12)")]
    BadProbabilities { sum: f64 },

    #[error("transition matrix row {row} sums to {sum} (must be 1 within 1e-12)")]
    BadTransitionMatrix { row: usize, sum: f64 },

    #[error("orbit window [{lo}, {hi}] does not contain fiber range [{need_lo}, {need_hi}]")]
    WindowExceeded {
        lo: i64,
        hi: i64,
        need_lo: i64,
        need_hi: i64,
    },

    #[error("fiber {fiber} is degenerate: min |T'| = {lambda:.3e}")]
    DegenerateMap { fiber: i64, lambda: f64 },

    #[error("density at fiber {fiber} did not converge: defect {defect:.3e} > tol {tol:.1e} at depth {depth}")]
    NonConverged { fiber: i64, defect: f64, tol: f64, depth: usize },

    #[error("interval ({0}, {1}) is not a valid arc")]
    BadInterval(f64, f64),

    #[error("observable interval violates the dyadic disjointness precondition: {0}")]
    PsiInterval(String),

    #[error("heavy-tail exponent delta = {0} must lie in (0, 1]")]
    BadDelta(f64),

    #[error("nonpositive entry {value} at index {index} in a positive series")]
    NonPositiveSeries { index: usize, value: f64 },

    #[error("{0}")]
    Invalid(String),
}
