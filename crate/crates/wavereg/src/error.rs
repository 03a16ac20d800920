//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, parameter or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed run-configuration file, with the offending line.
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    /// The traveling-wave operator is singular: it is invertible only for
    /// c^2 > g*h0 (c^2 > 1 in nondimensional units).
    #[error("wave speed c = {c} rejected: the traveling-wave operator is invertible only for c^2 > {threshold}")]
    InvalidSpeed { c: f64, threshold: f64 },

    /// Fixed-point iteration exhausted its iteration budget.
    #[error("iteration did not converge within {max_iter} iterations (last increment {increment:.3e}, tol {tol:.3e})")]
    NonConvergence {
        max_iter: usize,
        increment: f64,
        tol: f64,
    },

    /// Stabilization denominator collapsed; the iterate is (numerically) zero.
    #[error("degenerate iterate: stabilization denominator {denominator:.3e} is below 1e-30")]
    DegenerateIterate { denominator: f64 },

    /// A non-finite sample appeared during time stepping.
    #[error("solution blew up: non-finite value at t = {time}")]
    BlowUp { time: f64 },

    /// An internal invariant was violated (e.g. symbol/parity mismatch).
    #[error("internal invariant violation: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
