//! Scenario sweeps, figure tables and CSV output on top of
//! `beamexpand-core`.

pub mod check;
pub mod config;
pub mod error;
pub mod figures;
pub mod manifest;
pub mod scenario;
pub mod sweep;
pub mod table;

pub use error::{Error, Result};
