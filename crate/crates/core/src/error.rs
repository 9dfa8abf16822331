use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures raised by the physics and numerics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("invalid {what}: {reason}")]
    Domain {
        what: &'static str,
        reason: &'static str,
    },

    #[error("detuning is zero; the dipole potential is singular")]
    SingularDetuning,

    #[error("effective potential is singular at r = 0")]
    SingularRadius,

    #[error("trap becomes repulsive: omega_z^2 = {omega_sq:e} at t = {time:e}")]
    Attractivity { time: f64, omega_sq: f64 },

    #[error("grid too small: boundary amplitude {amplitude:e} exceeds {limit:e}")]
    Truncated { amplitude: f64, limit: f64 },

    #[error("level {requested} is outside the bound spectrum ({available} bound states)")]
    OutOfSpectrum { requested: usize, available: usize },

    #[error("wavefunctions live on different grids")]
    GridMismatch,

    #[error("grid needs a power-of-two length for the spectral kinetic step, got {0}")]
    NotPowerOfTwo(usize),

    #[error("time step {dt:e} is larger than the stability limit {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("boundary leakage {leakage:e} at t = {time:e} exceeds {limit:e}; enlarge the domain")]
    Leakage { leakage: f64, time: f64, limit: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged {
        what: &'static str,
        iterations: usize,
    },
}

impl Error {
    /// True for failures caused by the physics of the request (repulsive
    /// traps, singular inputs) rather than by numerics settings.
    pub fn is_physics_domain(&self) -> bool {
        matches!(
            self,
            Error::Attractivity { .. }
                | Error::SingularDetuning
                | Error::SingularRadius
                | Error::NonPositive { .. }
                | Error::Domain { .. }
        )
    }
}

pub(crate) fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositive { what, value })
    }
}
