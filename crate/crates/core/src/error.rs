//! Error type shared by every module in the crate.

use alloc::vec::Vec;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes surfaced by the toolkit.
///
/// Variants are grouped by cause rather than by module so callers can map
/// them onto coarse exit codes: everything except [`Error::Singular`] and
/// [`Error::Diverged`] indicates a problem with the inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands must share a shape and do not.
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Paired collections must have equal lengths and do not.
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// An empty collection where at least one element is required.
    EmptyInput { context: &'static str },
    /// A NaN or infinity was admitted or produced.
    NonFinite { context: &'static str },
    /// Input is structurally valid but carries no usable information
    /// (zero variance, coincident reference points, ...).
    Degenerate { context: &'static str },
    /// A scalar parameter is outside its documented range.
    InvalidParameter {
        name: &'static str,
        message: &'static str,
    },
    /// A coordinate or rectangle does not fit inside its grid.
    OutOfBounds { context: &'static str },
    /// A deliberately bounded computation was asked to exceed its guard.
    SizeGuard {
        context: &'static str,
        limit: usize,
        got: usize,
    },
    /// The inverse transform of a supposedly Hermitian spectrum produced a
    /// significant imaginary part, signalling an upstream symmetry bug.
    AsymmetricSpectrum { residual: f64 },
    /// A linear system that should be positive definite is numerically
    /// singular.
    Singular { context: &'static str },
    /// An iterative solver grew its objective past the divergence guard.
    /// Carries the objective trace recorded up to the failing iteration.
    Diverged { objectives: Vec<f64> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch {
                context,
                expected,
                got,
            } => write!(
                f,
                "{context}: shape mismatch, expected {}x{} but got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::LengthMismatch {
                context,
                expected,
                got,
            } => write!(
                f,
                "{context}: length mismatch, expected {expected} but got {got}"
            ),
            Error::EmptyInput { context } => write!(f, "{context}: empty input"),
            Error::NonFinite { context } => write!(f, "{context}: non-finite value"),
            Error::Degenerate { context } => write!(f, "{context}: degenerate input"),
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter `{name}`: {message}")
            }
            Error::OutOfBounds { context } => write!(f, "{context}: out of bounds"),
            Error::SizeGuard {
                context,
                limit,
                got,
            } => write!(f, "{context}: size {got} exceeds guard {limit}"),
            Error::AsymmetricSpectrum { residual } => write!(
                f,
                "inverse transform requested a real result but the imaginary residual is {residual:e}"
            ),
            Error::Singular { context } => write!(f, "{context}: singular system"),
            Error::Diverged { objectives } => write!(
                f,
                "iteration diverged after {} steps (objective grew past the guard)",
                objectives.len()
            ),
        }
    }
}

impl core::error::Error for Error {}
