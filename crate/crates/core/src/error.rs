use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors returned by the geometry routines.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation, e.g. a
    /// non-positive coordinate or a density argument off the simplex.
    Domain { what: &'static str, value: f64 },
    /// The call itself is malformed: wrong dimension, degenerate plane,
    /// unsupported family, mismatched base points.
    Usage(&'static str),
    /// An embedded point violates the graph relation of the hypersurface.
    Consistency { residual: f64 },
    /// The geodesic integrator failed.
    Integration(IntegrationFailure),
    /// An iterative solver ran out of iterations.
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrationFailureKind {
    StepUnderflow,
    QuadrantEscape,
    NonFinite,
    TooManySteps,
}

/// Diagnostics of a failed integration: the last accepted state.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationFailure {
    pub kind: IntegrationFailureKind,
    pub time: f64,
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl fmt::Display for IntegrationFailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntegrationFailureKind::StepUnderflow => "step size underflow",
            IntegrationFailureKind::QuadrantEscape => "trajectory left the open quadrant",
            IntegrationFailureKind::NonFinite => "non-finite state",
            IntegrationFailureKind::TooManySteps => "step budget exhausted",
        })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "domain error: {what} (got {value})"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Consistency { residual } => {
                write!(f, "embedded point violates the graph relation (residual {residual:e})")
            }
            Error::Integration(fail) => write!(f, "geodesic integration failed at t = {}: {}", fail.time, fail.kind),
            Error::NoConvergence {
                what,
                iterations,
                residual,
                ..
            } => write!(
                f,
                "{what} did not converge after {iterations} iterations (residual {residual:e})"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

impl From<IntegrationFailure> for Error {
    fn from(fail: IntegrationFailure) -> Self {
        Error::Integration(fail)
    }
}
