//! Numerical laboratory for quantum toboggans.
//!
//! A quantum toboggan is a one-dimensional Schrödinger bound-state problem
//! integrated along a complex contour that winds around branch points of the
//! wavefunction, so that the solution lives on several Riemann sheets.  This
//! crate builds the contours (straight lines, multisheet spirals, U-shaped
//! paths, two-branch-point toboggans and knot-like pullbacks), classifies
//! their winding by free-group words, integrates the Schrödinger equation
//! along them with an adaptive Runge–Kutta pair, locates bound states by
//! two-sided shooting with Wronskian matching, and implements the two
//! rectification changes of variables that map tobogganic models onto
//! non-tobogganic partners.
//!
//! Everything works in units with ħ = 2m = 1.

pub mod contour;
pub mod eigensolver;
pub mod emit;
pub mod geometry;
pub mod integrator;
pub mod potential;
pub mod rectify;
pub mod winding;

pub use num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported winding word: {0}")]
    UnsupportedWord(String),
    #[error("near singularity at s = {s}: {what}")]
    NearSingularity { s: f64, what: String },
    #[error("potential evaluated at pole {0}")]
    PoleEvaluation(Complex64),
    #[error("step size underflow (stiff region) near s = {0}")]
    StiffRegion(f64),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("ambiguous WKB branch at x = {0}")]
    AmbiguousBranch(Complex64),
    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidParameter(msg.into())
    }
}
