//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A geometric precondition failed (point on the boundary, identity map, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Construction input violates an algebraic relation or produces a
    /// degenerate configuration.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A side pairing or interval configuration fails the polygon axioms.
    #[error("invalid side pairing: {0}")]
    InvalidPairing(String),

    /// A symbolic sequence is inadmissible or cannot be resolved.
    #[error("coding error: {0}")]
    Coding(String),

    /// Two representations do not share the marked generating set / cusp data.
    #[error("type-preserving violation: {0}")]
    TypePreserving(String),

    /// Pressure requested below the phase-transition threshold.
    #[error("pressure diverges: s(a+b) = {beta} is below the threshold 1/2 + {guard} (phase transition at 1/(2(a+b)))")]
    Divergence { beta: f64, guard: f64 },

    /// An iterative scheme did not converge within its budget.
    #[error("numerical non-convergence: {0}")]
    NonConvergent(String),

    /// A root could not be bracketed.
    #[error("bracketing failure: {0}")]
    Bracketing(String),

    /// Not enough orbit data for a requested estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Bad run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
