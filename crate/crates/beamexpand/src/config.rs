//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # 2500 -> 250 Hz in a 3 um beam
//! trap.f0z_hz = 2500
//! trap.ffz_hz = 250
//! beam.waist_m = 3e-6, 10e-6
//! protocol.kind = invariant
//! protocol.tf_s = 0.5e-3, 1e-3
//! ```
//!
//! List-valued keys take comma-separated values. Command-line overrides
//! use the same `key=value` form and replace file values.

use std::collections::BTreeMap;
use std::path::Path;

use beamexpand_core::propagate::PotentialModel;
use beamexpand_core::protocol::{ExpansionTask, ProtocolKind};
use beamexpand_core::trap::{AtomSpecies, BeamGeometry};
use beamexpand_core::units::RB87_MASS;

use crate::error::{Context, Error, Result};
use crate::scenario::{Axis, Numerics, Scenario};

pub const KEYS: &[&str] = &[
    "run.name",
    "run.axis",
    "atom.mass_kg",
    "laser.wavelength_m",
    "beam.waist_m",
    "trap.f0z_hz",
    "trap.ffz_hz",
    "protocol.kind",
    "protocol.tf_s",
    "protocol.allow_repulsive",
    "state.n",
    "state.nu",
    "model.potential",
    "grid.nz",
    "grid.nr",
    "grid.dt_s",
    "grid.resolution",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    /// value and the line it came from (0 for overrides)
    entries: BTreeMap<String, (String, usize)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got `{body}`"),
            })?;
            let key = key.trim();
            check_key(key).map_err(|message| Error::Config { line, message })?;
            if cfg.entries.contains_key(key) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            cfg.entries
                .insert(key.to_string(), (value.trim().to_string(), line));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        check_key(key).map_err(Error::Usage)?;
        self.entries
            .insert(key.to_string(), (value.trim().to_string(), 0));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn fail(&self, key: &str, message: String) -> Error {
        match self.entries.get(key) {
            Some((_, line)) if *line > 0 => Error::Config {
                line: *line,
                message,
            },
            _ => Error::Usage(message),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.fail(key, format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|_| self.fail(key, format!("`{key}`: cannot parse `{item}`")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// Builds a scenario; unset keys take the defaults below (Rb-87,
    /// 1060 nm, 3 um, 2500 -> 250 Hz, invariant protocol, 1 ms, ground
    /// state, longitudinal axis).
    pub fn scenario(&self) -> Result<Scenario> {
        let mass = self.parsed("atom.mass_kg")?.unwrap_or(RB87_MASS);
        let wavelength = self.parsed("laser.wavelength_m")?.unwrap_or(1.06e-6);
        let waists: Vec<f64> = self.list("beam.waist_m")?.unwrap_or_else(|| vec![3e-6]);
        let f0 = self.parsed("trap.f0z_hz")?.unwrap_or(2500.0);
        let ff = self.parsed("trap.ffz_hz")?.unwrap_or(250.0);
        let final_times: Vec<f64> = self.list("protocol.tf_s")?.unwrap_or_else(|| vec![1e-3]);
        let protocol = match self.get("protocol.kind") {
            None => ProtocolKind::Invariant,
            Some(v) => parse_protocol(v).ok_or_else(|| {
                self.fail(
                    "protocol.kind",
                    format!(
                        "unknown protocol `{v}` (invariant, bang-bang, fast-adiabatic, static)"
                    ),
                )
            })?,
        };
        let axis = match self.get("run.axis") {
            None => Axis::Longitudinal,
            Some(v) => Axis::parse(v)
                .ok_or_else(|| self.fail("run.axis", format!("unknown axis `{v}` (z, r, 3d)")))?,
        };
        let model = match self.get("model.potential") {
            None | Some("full") => PotentialModel::Full,
            Some("harmonic") => PotentialModel::Harmonic,
            Some(v) => {
                return Err(self.fail(
                    "model.potential",
                    format!("unknown potential model `{v}` (full, harmonic)"),
                ))
            }
        };
        let atom = AtomSpecies::new(mass).context(|| "atom.mass_kg".into())?;
        let first_waist = *waists
            .first()
            .ok_or_else(|| self.fail("beam.waist_m", "beam.waist_m is empty".into()))?;
        let geometry =
            BeamGeometry::new(first_waist, wavelength).context(|| "beam geometry".into())?;
        let first_tf = final_times.first().copied().unwrap_or(1e-3);
        let task = ExpansionTask::from_hz(f0, ff, first_tf, atom, geometry)
            .context(|| "expansion task".into())?;
        let scenario = Scenario {
            name: self.get("run.name").unwrap_or("run").to_string(),
            task,
            protocol,
            waists,
            levels: self.list("state.n")?.unwrap_or_else(|| vec![0]),
            nu: self.parsed("state.nu")?.unwrap_or(0),
            axis,
            final_times,
            numerics: Numerics {
                nz: self.parsed("grid.nz")?,
                nr: self.parsed("grid.nr")?,
                dt: self.parsed("grid.dt_s")?,
                resolution: self.parsed("grid.resolution")?.unwrap_or(1.0),
                model,
                allow_repulsive: self.parsed("protocol.allow_repulsive")?,
            },
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

fn check_key(key: &str) -> std::result::Result<(), String> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(format!("unknown key `{key}`"))
    }
}

pub fn parse_protocol(name: &str) -> Option<ProtocolKind> {
    match name {
        "invariant" | "inverse-engineering" => Some(ProtocolKind::Invariant),
        "bang-bang" => Some(ProtocolKind::BangBang),
        "fast-adiabatic" => Some(ProtocolKind::FastAdiabatic),
        "static" => Some(ProtocolKind::Static),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_comments_and_overrides() {
        let text = "# comment\nbeam.waist_m = 3e-6, 10e-6  # two waists\nprotocol.tf_s=0.5e-3,1e-3\n\nstate.n = 0,1\n";
        let mut cfg = Config::parse(text).unwrap();
        cfg.set("trap.ffz_hz=25").unwrap();
        let s = cfg.scenario().unwrap();
        assert_eq!(s.waists, vec![3e-6, 10e-6]);
        assert_eq!(s.final_times, vec![0.5e-3, 1e-3]);
        assert_eq!(s.levels, vec![0, 1]);
        assert!((s.task.omegaf() - std::f64::consts::TAU * 25.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(
            Config::parse("beam.wasit_m = 1").unwrap_err(),
            Error::Config { line: 1, .. }
        ));
        assert!(matches!(
            Config::parse("state.n = 1\nstate.n = 2").unwrap_err(),
            Error::Config { line: 2, .. }
        ));
        assert!(Config::default().set("nope=1").is_err());
    }

    #[test]
    fn bad_values_point_at_their_line() {
        let cfg = Config::parse("\nstate.nu = x").unwrap();
        assert!(matches!(
            cfg.scenario().unwrap_err(),
            Error::Config { line: 2, .. }
        ));
    }

    #[test]
    fn unsorted_sweep_is_rejected() {
        let cfg = Config::parse("protocol.tf_s = 1e-3, 0.5e-3").unwrap();
        assert!(cfg.scenario().is_err());
    }
}
