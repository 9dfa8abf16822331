//! Fast expansions of a cold atom in a Gaussian-beam optical dipole trap.
//!
//! The crate designs trap-frequency trajectories from Ermakov scaling
//! functions, propagates the Schrödinger equation along them in the
//! longitudinal, radial and coupled cylindrical geometries, and evaluates
//! perturbative fidelity estimates. It is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod grid;
pub mod numerics;
pub mod perturbation;
pub mod propagate;
pub mod protocol;
pub mod spectral;
pub mod trap;
pub mod units;

pub use error::{Error, Result};
