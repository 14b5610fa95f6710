use thiserror::Error;

use crate::phonon_kernels::RateCurve;

/// Errors raised by the physics library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown material preset: {0}")]
    UnknownMaterial(String),

    #[error("argument outside domain in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("exponent {exponent:e} outside the safe range in {context}")]
    ExponentOverflow { context: &'static str, exponent: f64 },

    #[error("quadrature did not converge in {context} (estimate {estimate:e}, error {error:e})")]
    Quadrature {
        context: &'static str,
        estimate: f64,
        error: f64,
    },

    #[error("kinetic solver did not converge after {steps} steps (residual {residual:e})")]
    NonConvergence { steps: usize, residual: f64 },

    #[error("time step underflow at t = {time:e} (dt = {dt:e})")]
    StepUnderflow { time: f64, dt: f64 },

    #[error("singular linear system in implicit step")]
    SingularSystem,

    #[error("no sign change for {label} in [{lo:e}, {hi:e}] K")]
    Bracketing {
        label: &'static str,
        lo: f64,
        hi: f64,
        curve: Box<RateCurve>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("occupation vanishes at x = {x} outside the flagged gap-edge region")]
    ZeroOccupation { x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}
