//! Physical constants and the trap unit system.
//!
//! Everything downstream of the trap model runs in trap units: `hbar = m = 1`,
//! times in `1 / omega_ref`, lengths in `sqrt(hbar / (m omega_ref))` and
//! energies in `hbar omega_ref`. SI values only cross module boundaries.

use crate::error::{positive, Result};
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

/// Planck constant (J s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * core::f64::consts::PI);
/// Speed of light (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Standard gravity (m/s^2).
pub const STANDARD_GRAVITY: f64 = 9.806_65;
/// Mass of rubidium-87 (kg), 86.909 u.
pub const RB87_MASS: f64 = 1.44316e-25;

/// Scales that map SI quantities to trap units for a reference angular
/// frequency and atomic mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapUnits {
    omega: f64,
    mass: f64,
    length: f64,
}

impl TrapUnits {
    pub fn new(omega_ref: f64, mass: f64) -> Result<Self> {
        let omega = positive("reference angular frequency", omega_ref)?;
        let mass = positive("atom mass", mass)?;
        let length = (HBAR / (mass * omega)).sqrt();
        Ok(Self {
            omega,
            mass,
            length,
        })
    }

    /// Reference angular frequency (rad/s).
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Length unit (m).
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Time unit (s).
    pub fn time(&self) -> f64 {
        1.0 / self.omega
    }

    /// Energy unit (J).
    pub fn energy(&self) -> f64 {
        HBAR * self.omega
    }

    pub fn length_to_trap(&self, meters: f64) -> f64 {
        meters / self.length
    }

    pub fn length_to_si(&self, value: f64) -> f64 {
        value * self.length
    }

    pub fn time_to_trap(&self, seconds: f64) -> f64 {
        seconds * self.omega
    }

    pub fn time_to_si(&self, value: f64) -> f64 {
        value / self.omega
    }

    pub fn frequency_to_trap(&self, rad_per_s: f64) -> f64 {
        rad_per_s / self.omega
    }

    pub fn frequency_to_si(&self, value: f64) -> f64 {
        value * self.omega
    }

    pub fn energy_to_trap(&self, joules: f64) -> f64 {
        joules / self.energy()
    }

    pub fn energy_to_si(&self, value: f64) -> f64 {
        value * self.energy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_are_exact_to_rounding() {
        let units = TrapUnits::new(2.0 * core::f64::consts::PI * 2500.0, RB87_MASS).unwrap();
        for x in [1e-9, 3e-6, 2.5e-3, 17.0] {
            assert!((units.length_to_si(units.length_to_trap(x)) / x - 1.0).abs() < 1e-14);
            assert!((units.time_to_si(units.time_to_trap(x)) / x - 1.0).abs() < 1e-14);
            assert!((units.energy_to_si(units.energy_to_trap(x)) / x - 1.0).abs() < 1e-14);
        }
        // hbar / (m l^2 omega) = 1 by construction
        let check = HBAR / (units.mass() * units.length().powi(2) * units.omega());
        assert!((check - 1.0).abs() < 1e-14);
    }
}
