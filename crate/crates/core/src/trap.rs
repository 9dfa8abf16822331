//! Gaussian-beam optical dipole trap: beam geometry, laser drive, the
//! dipole potential and the static relations between depth and trap
//! frequencies.
//!
//! Functions here are unit-agnostic unless they take physical constants
//! explicitly: any consistent system works (SI or trap units).

use core::f64::consts::{PI, SQRT_2};

use crate::error::{positive, Error, Result};
use crate::units::{HBAR, PLANCK, SPEED_OF_LIGHT};
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

/// Whether a negative trap depth (a transiently repulsive potential) is
/// acceptable to the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignPolicy {
    #[default]
    AttractiveOnly,
    AllowRepulsive,
}

/// Waist and wavelength of the trapping beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    waist: f64,
    wavelength: f64,
    rayleigh: f64,
    paraxial: bool,
}

impl BeamGeometry {
    /// Builds the geometry; beams outside the paraxial regime
    /// (`w0 <= 2 lambda / pi`) are accepted but flagged.
    pub fn new(waist: f64, wavelength: f64) -> Result<Self> {
        let rayleigh = rayleigh_range(waist, wavelength)?;
        Ok(Self {
            waist,
            wavelength,
            rayleigh,
            paraxial: waist > 2.0 * wavelength / PI,
        })
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn rayleigh_range(&self) -> f64 {
        self.rayleigh
    }

    pub fn is_paraxial(&self) -> bool {
        self.paraxial
    }

    /// Beam radius `w(z) = w0 sqrt(1 + z^2 / zR^2)`.
    pub fn spot_size(&self, z: f64) -> f64 {
        self.waist * (1.0 + (z / self.rayleigh).powi(2)).sqrt()
    }

    /// `omega_R / omega_z = sqrt(2) pi w0 / lambda`.
    pub fn radial_ratio(&self) -> f64 {
        SQRT_2 * PI * self.waist / self.wavelength
    }

    /// The same beam with lengths divided by `unit`.
    pub fn rescaled(&self, unit: f64) -> Self {
        Self {
            waist: self.waist / unit,
            wavelength: self.wavelength / unit,
            rayleigh: self.rayleigh / unit,
            paraxial: self.paraxial,
        }
    }
}

/// `zR = pi w0^2 / lambda`.
pub fn rayleigh_range(waist: f64, wavelength: f64) -> Result<f64> {
    let w0 = positive("beam waist", waist)?;
    let lambda = positive("wavelength", wavelength)?;
    Ok(PI * w0 * w0 / lambda)
}

/// Two-level saturation intensity `pi h c / (3 lambda^3 tau)` in W/m^2.
/// `lambda` is the wavelength of the atomic transition.
pub fn saturation_intensity(wavelength: f64, lifetime: f64) -> Result<f64> {
    let lambda = positive("transition wavelength", wavelength)?;
    let tau = positive("excited-state lifetime", lifetime)?;
    Ok(PI * PLANCK * SPEED_OF_LIGHT / (3.0 * lambda.powi(3) * tau))
}

/// Far-detuned two-level laser drive (SI units).
///
/// The detuning is stored signed, `delta = omega_laser - omega_atom`; red
/// detuning (`delta < 0`) gives an attractive trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserDrive {
    linewidth: f64,
    detuning: f64,
    peak_intensity: f64,
    transition_wavelength: f64,
    saturation: f64,
}

impl LaserDrive {
    pub fn new(
        linewidth: f64,
        detuning: f64,
        peak_intensity: f64,
        transition_wavelength: f64,
    ) -> Result<Self> {
        let linewidth = positive("linewidth", linewidth)?;
        if !detuning.is_finite() {
            return Err(Error::Domain {
                what: "detuning",
                reason: "not finite",
            });
        }
        if !(peak_intensity >= 0.0 && peak_intensity.is_finite()) {
            return Err(Error::NonPositive {
                what: "peak intensity",
                value: peak_intensity,
            });
        }
        let saturation = saturation_intensity(transition_wavelength, 1.0 / linewidth)?;
        Ok(Self {
            linewidth,
            detuning,
            peak_intensity,
            transition_wavelength,
            saturation,
        })
    }

    /// Peak intensity `2 P / (pi w0^2)` of a Gaussian beam of power `P`.
    pub fn peak_intensity_from_power(power: f64, waist: f64) -> f64 {
        2.0 * power / (PI * waist * waist)
    }

    pub fn linewidth(&self) -> f64 {
        self.linewidth
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn lifetime(&self) -> f64 {
        1.0 / self.linewidth
    }

    pub fn peak_intensity(&self) -> f64 {
        self.peak_intensity
    }

    pub fn transition_wavelength(&self) -> f64 {
        self.transition_wavelength
    }

    pub fn saturation_intensity(&self) -> f64 {
        self.saturation
    }

    /// Resonant Rabi frequency at peak intensity, from `I / I_sat = 2 Omega^2 / Gamma^2`.
    pub fn rabi_frequency(&self) -> f64 {
        self.linewidth * (self.peak_intensity / (2.0 * self.saturation)).sqrt()
    }

    /// `|delta| / max(Gamma, Omega)`; the dipole formula wants this `>> 1`.
    pub fn validity_ratio(&self) -> f64 {
        self.detuning.abs() / self.linewidth.max(self.rabi_frequency())
    }
}

/// Trap depth `V0 = I0 hbar Gamma^2 / (8 |delta| I_sat)` in joules.
///
/// Returned positive for red detuning (attractive trap). Blue detuning
/// yields a negative depth, rejected unless `policy` allows it.
pub fn depth_from_laser(drive: &LaserDrive, policy: SignPolicy) -> Result<f64> {
    if drive.detuning == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let magnitude = drive.peak_intensity * HBAR * drive.linewidth.powi(2)
        / (8.0 * drive.detuning.abs() * drive.saturation);
    let depth = if drive.detuning < 0.0 {
        magnitude
    } else {
        -magnitude
    };
    if depth < 0.0 && policy == SignPolicy::AttractiveOnly {
        return Err(Error::Attractivity {
            time: 0.0,
            omega_sq: depth,
        });
    }
    Ok(depth)
}

/// Atom species; only the mass matters for the motional dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpecies {
    mass: f64,
}

impl AtomSpecies {
    pub fn new(mass: f64) -> Result<Self> {
        Ok(Self {
            mass: positive("atom mass", mass)?,
        })
    }

    pub fn rubidium87() -> Self {
        Self {
            mass: crate::units::RB87_MASS,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

/// Trap at one instant: depth, beam, azimuthal quantum number, and
/// `hbar^2 / m` in the snapshot's unit system (1 in trap units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSnapshot {
    pub depth: f64,
    pub geometry: BeamGeometry,
    pub nu: i32,
    pub hbar2_over_mass: f64,
}

impl TrapSnapshot {
    pub fn si(depth: f64, geometry: BeamGeometry, nu: i32, atom: AtomSpecies) -> Self {
        Self {
            depth,
            geometry,
            nu,
            hbar2_over_mass: HBAR * HBAR / atom.mass(),
        }
    }

    pub fn trap_units(depth: f64, geometry: BeamGeometry, nu: i32) -> Self {
        Self {
            depth,
            geometry,
            nu,
            hbar2_over_mass: 1.0,
        }
    }
}

/// Dimensionless well shape `1 - exp(-2 r^2 / w(z)^2) / (1 + z^2 / zR^2)`,
/// evaluated without cancellation near the origin.
pub fn well_shape(r: f64, z: f64, geometry: &BeamGeometry) -> f64 {
    let q = (z / geometry.rayleigh).powi(2);
    let a = 2.0 * r * r / (geometry.waist * geometry.waist * (1.0 + q));
    (q - (-a).exp_m1()) / (1.0 + q)
}

/// Longitudinal shape at `r = 0`: `1 - 1 / (1 + z^2 / zR^2)`.
pub fn longitudinal_shape(z: f64, geometry: &BeamGeometry) -> f64 {
    let q = (z / geometry.rayleigh).powi(2);
    q / (1.0 + q)
}

/// Radial shape at `z = 0`: `1 - exp(-2 r^2 / w0^2)`.
pub fn radial_shape(r: f64, geometry: &BeamGeometry) -> f64 {
    -(-2.0 * r * r / (geometry.waist * geometry.waist)).exp_m1()
}

/// Dipole potential with the constant offset that puts the minimum at zero:
/// `V0 (1 - exp(-2 r^2 / w^2(z)) / (1 + z^2 / zR^2))`.
pub fn potential(r: f64, z: f64, snap: &TrapSnapshot) -> f64 {
    snap.depth * well_shape(r, z, &snap.geometry)
}

/// Centrifugal term `hbar^2 (nu^2 - 1/4) / (2 m r^2)` of the `sqrt(r)`-reduced
/// radial equation.
pub fn centrifugal(r: f64, nu: i32, hbar2_over_mass: f64) -> f64 {
    let nu = nu as f64;
    hbar2_over_mass * (nu * nu - 0.25) / (2.0 * r * r)
}

/// Potential felt by `sqrt(r) F(r, z)`: the dipole potential plus the
/// centrifugal term.
pub fn effective_potential(r: f64, z: f64, snap: &TrapSnapshot) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::SingularRadius);
    }
    Ok(potential(r, z, snap) + centrifugal(r, snap.nu, snap.hbar2_over_mass))
}

/// `V0 = m omega_z^2 zR^2 / 2` from the squared longitudinal frequency.
pub fn v0_from_omega_z_sq(
    omega_z_sq: f64,
    geometry: &BeamGeometry,
    mass: f64,
    policy: SignPolicy,
) -> Result<f64> {
    if omega_z_sq < 0.0 && policy == SignPolicy::AttractiveOnly {
        return Err(Error::Attractivity {
            time: 0.0,
            omega_sq: omega_z_sq,
        });
    }
    Ok(0.5 * mass * omega_z_sq * geometry.rayleigh.powi(2))
}

pub fn v0_from_omega_z(omega_z: f64, geometry: &BeamGeometry, mass: f64) -> Result<f64> {
    v0_from_omega_z_sq(
        omega_z * omega_z,
        geometry,
        mass,
        SignPolicy::AttractiveOnly,
    )
}

/// Inverse of [`v0_from_omega_z`] for non-negative depths.
pub fn omega_z_from_v0(depth: f64, geometry: &BeamGeometry, mass: f64) -> Result<f64> {
    if depth < 0.0 {
        return Err(Error::Attractivity {
            time: 0.0,
            omega_sq: depth,
        });
    }
    Ok((2.0 * depth / mass).sqrt() / geometry.rayleigh)
}

/// `omega_R = sqrt(2) pi w0 omega_z / lambda`.
pub fn omega_r_from_omega_z(omega_z: f64, geometry: &BeamGeometry) -> f64 {
    geometry.radial_ratio() * omega_z
}

/// Coefficients of the quartic Taylor expansion of the potential about
/// the trap centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticSeries {
    pub r2: f64,
    pub z2: f64,
    pub r4: f64,
    pub z4: f64,
    pub r2z2: f64,
}

impl QuarticSeries {
    pub fn evaluate(&self, r: f64, z: f64) -> f64 {
        let (r2, z2) = (r * r, z * z);
        self.r2 * r2 + self.z2 * z2 + self.r4 * r2 * r2 + self.z4 * z2 * z2 + self.r2z2 * r2 * z2
    }
}

pub fn series_coefficients(snap: &TrapSnapshot) -> QuarticSeries {
    let v0 = snap.depth;
    let w2 = snap.geometry.waist.powi(2);
    let zr2 = snap.geometry.rayleigh.powi(2);
    QuarticSeries {
        r2: 2.0 * v0 / w2,
        z2: v0 / zr2,
        r4: -2.0 * v0 / (w2 * w2),
        z4: -v0 / (zr2 * zr2),
        r2z2: -4.0 * v0 / (w2 * zr2),
    }
}

/// Dimensionless validity checks for the beam and the neglect of gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalMargins {
    /// `w0 / (2 lambda / pi)`; paraxial optics wants this well above one.
    pub paraxial_ratio: f64,
    /// `g / (w0 omega_R^2)`; gravity sag is negligible when this is small.
    pub gravity_ratio: f64,
}

pub fn physical_margins(geometry: &BeamGeometry, omega_r: f64, gravity: f64) -> PhysicalMargins {
    PhysicalMargins {
        paraxial_ratio: geometry.waist / (2.0 * geometry.wavelength / PI),
        gravity_ratio: gravity / (geometry.waist * omega_r * omega_r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::RB87_MASS;
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 1.06e-6;

    fn snapshot_2500hz(waist: f64) -> TrapSnapshot {
        let geom = BeamGeometry::new(waist, LAMBDA).unwrap();
        let omega = 2.0 * PI * 2500.0;
        let v0 = v0_from_omega_z(omega, &geom, RB87_MASS).unwrap();
        TrapSnapshot::si(v0, geom, 0, AtomSpecies::rubidium87())
    }

    #[test]
    fn rayleigh_range_examples() {
        assert_relative_eq!(
            rayleigh_range(3e-6, LAMBDA).unwrap(),
            2.6674e-5,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            rayleigh_range(10e-6, LAMBDA).unwrap(),
            2.9638e-4,
            max_relative = 1e-4
        );
        assert_relative_eq!(rayleigh_range(1.0, PI).unwrap(), 1.0, max_relative = 1e-15);
        assert!(rayleigh_range(0.0, LAMBDA).is_err());
        assert!(rayleigh_range(1e-6, -1.0).is_err());
        let geom = BeamGeometry::new(3e-6, LAMBDA).unwrap();
        assert_relative_eq!(
            geom.rayleigh_range(),
            PI * 9e-12 / LAMBDA,
            max_relative = 1e-12
        );
        assert!(geom.is_paraxial());
        assert!(!BeamGeometry::new(0.5e-6, LAMBDA).unwrap().is_paraxial());
    }

    #[test]
    fn saturation_intensity_scalings() {
        let base = saturation_intensity(LAMBDA, 26e-9).unwrap();
        assert_relative_eq!(
            saturation_intensity(LAMBDA, 52e-9).unwrap(),
            base / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            saturation_intensity(2.0 * LAMBDA, 26e-9).unwrap(),
            base / 8.0,
            max_relative = 1e-14
        );
        let independent = PI * 6.62607015e-34 * 299792458.0 / (3.0 * 1.06e-6f64.powi(3) * 26e-9);
        assert_relative_eq!(base, independent, max_relative = 1e-12);
        assert!(saturation_intensity(0.0, 1.0).is_err());
    }

    #[test]
    fn depth_from_laser_scalings_and_errors() {
        let gamma = 1.0 / 26.24e-9;
        let zero = LaserDrive::new(gamma, -1e14, 0.0, 780.24e-9).unwrap();
        assert_eq!(
            depth_from_laser(&zero, SignPolicy::AttractiveOnly).unwrap(),
            0.0
        );
        let one = LaserDrive::new(gamma, -1e14, 1e10, 780.24e-9).unwrap();
        let two = LaserDrive::new(gamma, -2e14, 1e10, 780.24e-9).unwrap();
        let v1 = depth_from_laser(&one, SignPolicy::AttractiveOnly).unwrap();
        let v2 = depth_from_laser(&two, SignPolicy::AttractiveOnly).unwrap();
        assert_relative_eq!(v2, v1 / 2.0, max_relative = 1e-14);
        let blue = LaserDrive::new(gamma, 1e14, 1e10, 780.24e-9).unwrap();
        assert!(matches!(
            depth_from_laser(&blue, SignPolicy::AttractiveOnly),
            Err(Error::Attractivity { .. })
        ));
        assert!(depth_from_laser(&blue, SignPolicy::AllowRepulsive).unwrap() < 0.0);
        let singular = LaserDrive::new(gamma, 0.0, 1e10, 780.24e-9).unwrap();
        assert_eq!(
            depth_from_laser(&singular, SignPolicy::AllowRepulsive),
            Err(Error::SingularDetuning)
        );
    }

    #[test]
    fn potential_landmarks() {
        let snap = snapshot_2500hz(3e-6);
        let zr = snap.geometry.rayleigh_range();
        assert_eq!(potential(0.0, 0.0, &snap), 0.0);
        assert_relative_eq!(
            potential(0.0, zr, &snap),
            snap.depth / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(potential(1.0, 0.0, &snap), snap.depth, max_relative = 1e-14);
        assert_relative_eq!(potential(0.0, 1e3, &snap), snap.depth, max_relative = 1e-12);
    }

    #[test]
    fn centrifugal_terms() {
        let geom = BeamGeometry::new(3.0, 1.0).unwrap();
        let snap0 = TrapSnapshot::trap_units(10.0, geom, 0);
        let snap1 = TrapSnapshot::trap_units(10.0, geom, 1);
        let r = 0.3;
        let base = potential(r, 0.0, &snap0);
        assert_relative_eq!(
            effective_potential(r, 0.0, &snap0).unwrap() - base,
            -1.0 / (8.0 * r * r),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            effective_potential(r, 0.0, &snap1).unwrap() - base,
            3.0 / (8.0 * r * r),
            max_relative = 1e-12
        );
        assert_eq!(
            effective_potential(0.0, 0.0, &snap0),
            Err(Error::SingularRadius)
        );
        let far = 1e7;
        let v = effective_potential(far, 0.0, &snap1).unwrap();
        assert_relative_eq!(v, potential(far, 0.0, &snap1), max_relative = 1e-12);
    }

    #[test]
    fn depth_frequency_conversions() {
        let geom = BeamGeometry::new(3e-6, LAMBDA).unwrap();
        assert_eq!(v0_from_omega_z(0.0, &geom, RB87_MASS).unwrap(), 0.0);
        let omega = 2.0 * PI * 2500.0;
        let v0 = v0_from_omega_z(omega, &geom, RB87_MASS).unwrap();
        let expected = RB87_MASS * omega * omega * 2.6674e-5f64.powi(2) / 2.0;
        assert_relative_eq!(v0, expected, max_relative = 1e-4);
        assert_relative_eq!(v0, 1.267e-26, max_relative = 1e-3);
        assert_relative_eq!(
            omega_z_from_v0(v0, &geom, RB87_MASS).unwrap(),
            omega,
            max_relative = 1e-12
        );
        assert!(matches!(
            v0_from_omega_z_sq(-1.0, &geom, RB87_MASS, SignPolicy::AttractiveOnly),
            Err(Error::Attractivity { .. })
        ));
        assert!(
            v0_from_omega_z_sq(-1.0, &geom, RB87_MASS, SignPolicy::AllowRepulsive).unwrap() < 0.0
        );
    }

    #[test]
    fn radial_frequency_link() {
        let g3 = BeamGeometry::new(3e-6, LAMBDA).unwrap();
        let g10 = BeamGeometry::new(10e-6, LAMBDA).unwrap();
        assert_relative_eq!(omega_r_from_omega_z(1.0, &g3), 12.574, max_relative = 1e-4);
        assert_relative_eq!(omega_r_from_omega_z(1.0, &g10), 41.914, max_relative = 1e-4);
        let equal = BeamGeometry::new(LAMBDA / (SQRT_2 * PI), LAMBDA).unwrap();
        assert_relative_eq!(omega_r_from_omega_z(5.0, &equal), 5.0, max_relative = 1e-14);
    }

    #[test]
    fn harmonic_terms_match_frequencies() {
        let snap = snapshot_2500hz(3e-6);
        let series = series_coefficients(&snap);
        let omega_z = 2.0 * PI * 2500.0;
        let omega_r = omega_r_from_omega_z(omega_z, &snap.geometry);
        assert_relative_eq!(
            2.0 * series.z2,
            RB87_MASS * omega_z * omega_z,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            2.0 * series.r2,
            RB87_MASS * omega_r * omega_r,
            max_relative = 1e-12
        );
    }

    #[test]
    fn quartic_coefficients_scaling_with_waist_at_fixed_omega_z() {
        let omega = 1.0;
        let mut ratios = [[0.0; 3]; 2];
        for (slot, waist) in [3.0, 6.0].into_iter().enumerate() {
            let geom = BeamGeometry::new(waist, 0.4).unwrap();
            let v0 = v0_from_omega_z(omega, &geom, 1.0).unwrap();
            let s = series_coefficients(&TrapSnapshot::trap_units(v0, geom, 0));
            ratios[slot] = [s.r4, s.z4, s.r2z2];
        }
        // V0 grows as w0^4, so only the z^4 term falls as w0^-4
        assert_relative_eq!(ratios[0][0] / ratios[1][0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(ratios[0][1] / ratios[1][1], 16.0, max_relative = 1e-12);
        assert_relative_eq!(ratios[0][2] / ratios[1][2], 4.0, max_relative = 1e-12);
    }

    #[test]
    fn coupling_coefficient_matches_mixed_fourth_difference() {
        // micrometre units keep the differences well conditioned
        let geom = BeamGeometry::new(3.0, 1.06).unwrap();
        let snap = TrapSnapshot::trap_units(1.0, geom, 0);
        let series = series_coefficients(&snap);
        let (hr, hz) = (1e-4 * geom.waist(), 1e-4 * geom.rayleigh_range());
        let mut mixed = 0.0;
        for (i, wr) in [(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)] {
            for (j, wz) in [(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)] {
                mixed += wr * wz * potential(i * hr, j * hz, &snap);
            }
        }
        let d4 = mixed / (hr * hr * hz * hz);
        assert_relative_eq!(series.r2z2, d4 / 4.0, max_relative = 1e-6);
    }

    #[test]
    fn physical_margin_examples() {
        let boundary = BeamGeometry::new(2.0 * LAMBDA / PI, LAMBDA).unwrap();
        assert_relative_eq!(
            physical_margins(&boundary, 1.0, 9.81).paraxial_ratio,
            1.0,
            max_relative = 1e-14
        );
        let geom = BeamGeometry::new(3e-6, LAMBDA).unwrap();
        let m = physical_margins(&geom, 2.0 * PI * 31.4e3, 9.81);
        assert_relative_eq!(m.gravity_ratio, 8.4e-5, max_relative = 1e-2);
        assert!(physical_margins(&geom, 1e14, 9.81).gravity_ratio < 1e-20);
    }
}
