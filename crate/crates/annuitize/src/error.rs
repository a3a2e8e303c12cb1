//! Error type shared by every solver, oracle and driver in the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of validation, root finding, quadrature and the drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A standing parameter assumption failed; the payload names it.
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    /// The shock severity and intensity coincide (within the relative guard),
    /// where the pre-shock solution acquires logarithmic terms.
    #[error("near-degenerate shock: |delta - lambda_l| = {gap:e} is within the guard")]
    NearDegenerateShock { gap: f64 },

    /// An operation was asked for something its regime does not have.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// The bracket search found no sign change of the residual.
    #[error("no bracket: {0}")]
    NoBracket(String),

    /// More than one sign change was found where exactly one was expected.
    #[error("multiple roots ({count}) of {what}; first at {first}")]
    MultipleRoots { what: String, count: usize, first: f64 },

    /// Neither or both ordering branches of an implicit threshold were self-consistent.
    #[error("branch inconsistency: {0}")]
    BranchInconsistency(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate}, error {error:e}")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    /// A residual grid point sits on (or within the margin of) a breakpoint.
    #[error("grid point {x} touches breakpoint {breakpoint}")]
    GridTouchesBreakpoint { x: f64, breakpoint: f64 },

    /// A crossing search was given a quantity without a sign change.
    #[error("no sign change: {0}")]
    NoSignChange(String),

    /// Configuration file or override problems.
    #[error("{0}")]
    Config(String),

    /// Invalid simulation or sweep settings, or other runtime failures.
    #[error("{0}")]
    Runtime(String),
}
