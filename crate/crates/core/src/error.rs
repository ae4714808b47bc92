//! Error type shared by all modules.

use std::fmt;

use crate::scalar::Scalar;
use crate::solver::SolveRecord;

/// Errors produced by operator construction, solvers and choice rules.
#[derive(Debug, Clone)]
pub enum CoreError<T: Scalar> {
    /// A precondition on user input failed (bad grid, nonpositive parameter, ...).
    InvalidInput(String),
    /// Vector/matrix dimensions do not line up.
    DimensionMismatch { expected: usize, got: usize, what: &'static str },
    /// An operation was called on a penalty kind that does not support it.
    UnsupportedKind(String),
    /// The penalty combination has no registered solver.
    UnsupportedCombination(String),
    /// The normal-equations matrix is singular; `pivot` is the index of the
    /// first null direction encountered by the factorization.
    Singular { pivot: usize },
    /// An iterative solver hit its iteration cap; the best iterate so far is
    /// attached so callers can inspect or keep it.
    NotConverged { best: Box<SolveRecord<T>>, tol: T },
    /// A fixed-point update divided by a vanishing penalty value.
    DegeneratePenalty { index: usize },
    /// The discrepancy equation could not be bracketed within the probe range.
    BracketFail { phi_low: T, phi_high: T, target: T },
    /// Filesystem problems, with the offending path attached.
    Io { path: String, message: String },
}

impl<T: Scalar> fmt::Display for CoreError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            CoreError::DimensionMismatch { expected, got, what } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, got {got}")
            }
            CoreError::UnsupportedKind(msg) => write!(f, "unsupported penalty kind: {msg}"),
            CoreError::UnsupportedCombination(msg) => {
                write!(f, "unsupported penalty combination: {msg}")
            }
            CoreError::Singular { pivot } => {
                write!(f, "singular system: nonpositive pivot at index {pivot}")
            }
            CoreError::NotConverged { best, tol } => write!(
                f,
                "solver did not reach tolerance {tol:e} in {} iterations (kkt residual {:e})",
                best.iterations, best.kkt_residual
            ),
            CoreError::DegeneratePenalty { index } => write!(
                f,
                "penalty {index} vanished at the current iterate; it is inactive for this data"
            ),
            CoreError::BracketFail { phi_low, phi_high, target } => write!(
                f,
                "discrepancy target {target:e} not bracketed: phi ranges over [{phi_low:e}, {phi_high:e}]"
            ),
            CoreError::Io { path, message } => write!(f, "io error on {path}: {message}"),
        }
    }
}

impl<T: Scalar> std::error::Error for CoreError<T> {}
