//! Time-dependent Schrödinger solvers along a frequency trajectory, in
//! trap units.
//!
//! Every scheme is a Strang splitting: an exact potential phase at the
//! step-midpoint time around a kinetic step (Fourier or Crank-Nicolson).
//! Steps never straddle a trajectory breakpoint.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{Wavefunction1D, Wavefunction2D};
use crate::numerics::special::cis_turns;
use crate::protocol::FrequencyTrajectory;
use crate::trap::{longitudinal_shape, radial_shape, well_shape, BeamGeometry};

mod cylindrical;
mod longitudinal;
mod radial;

pub use cylindrical::{ground_state_2d, propagate_3d, GroundState2D, GroundStateOptions};
pub use longitudinal::propagate_longitudinal;
pub use radial::propagate_radial;

/// Largest boundary density tolerated during a run.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Number of outermost nodes watched for leakage.
pub const LEAKAGE_WIDTH: usize = 4;

/// Steps between norm and leakage checkpoints.
const CHECK_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    SplitOperatorZ,
    CrankNicolsonR,
    Adi2D,
}

/// Kinetic factor of the longitudinal split step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LongitudinalKinetic {
    /// Exact `exp(-i k^2 dt / 2)` in Fourier space; needs a power-of-two grid.
    #[default]
    Spectral,
    /// Crank-Nicolson on the three-point Laplacian, the same operator the
    /// 2D solver uses along `z`.
    FiniteDifference,
}

/// Which potential the solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialModel {
    /// The Gaussian-beam potential.
    Full,
    /// Its quadratic part only. In 2D this is the separable harmonic trap
    /// with the radial-longitudinal coupling dropped.
    Harmonic,
}

/// Spatial shape `S` of the potential `V = V0(t) S`.
pub(crate) fn shape_z(model: PotentialModel, geometry: &BeamGeometry) -> impl Fn(f64) -> f64 + '_ {
    move |z| match model {
        PotentialModel::Full => longitudinal_shape(z, geometry),
        PotentialModel::Harmonic => (z / geometry.rayleigh_range()).powi(2),
    }
}

pub(crate) fn shape_r(model: PotentialModel, geometry: &BeamGeometry) -> impl Fn(f64) -> f64 + '_ {
    move |r| match model {
        PotentialModel::Full => radial_shape(r, geometry),
        PotentialModel::Harmonic => 2.0 * (r / geometry.waist()).powi(2),
    }
}

pub(crate) fn shape_rz(
    model: PotentialModel,
    geometry: &BeamGeometry,
) -> impl Fn(f64, f64) -> f64 + '_ {
    move |r, z| match model {
        PotentialModel::Full => well_shape(r, z, geometry),
        PotentialModel::Harmonic => {
            2.0 * (r / geometry.waist()).powi(2) + (z / geometry.rayleigh_range()).powi(2)
        }
    }
}

/// Run of equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub dt: f64,
    pub count: usize,
}

/// Trajectory, scheme, potential model and a breakpoint-aligned step
/// schedule covering `[0, t_f]`.
#[derive(Debug, Clone)]
pub struct PropagationPlan {
    trajectory: FrequencyTrajectory,
    scheme: Scheme,
    model: PotentialModel,
    segments: Vec<Segment>,
    reversed: bool,
    kinetic_z: LongitudinalKinetic,
}

impl PropagationPlan {
    /// Steps of at most `dt`, where `omega_max` is the largest frequency
    /// along the scheme's axes. The default is `(2 pi / omega_max) / 200` in
    /// 1D and the limit `(2 pi / omega_max) / 50` in 2D. The
    /// trajectory must be in trap units (`hbar = m = 1`).
    pub fn new(
        trajectory: FrequencyTrajectory,
        scheme: Scheme,
        model: PotentialModel,
        dt: Option<f64>,
    ) -> Result<Self> {
        if (trajectory.mass() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain {
                what: "propagation plan",
                reason: "trajectory must be in trap units",
            });
        }
        let limit = Self::max_step(&trajectory, scheme);
        let dt = dt.unwrap_or(match scheme {
            Scheme::Adi2D => limit,
            _ => limit / 4.0,
        });
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::NonPositive {
                what: "time step",
                value: dt,
            });
        }
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt, limit });
        }
        let t_f = trajectory.t_final();
        let mut cuts: Vec<f64> = trajectory
            .breakpoints()
            .iter()
            .cloned()
            .filter(|&b| b > 0.0 && b < t_f)
            .collect();
        cuts.insert(0, 0.0);
        cuts.push(t_f);
        let segments = cuts
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let len = w[1] - w[0];
                let count = (len / dt).ceil().max(1.0) as usize;
                Segment {
                    start: w[0],
                    dt: len / count as f64,
                    count,
                }
            })
            .collect();
        Ok(Self {
            trajectory,
            scheme,
            model,
            segments,
            reversed: false,
            kinetic_z: LongitudinalKinetic::default(),
        })
    }

    /// `(2 pi / omega_max) / 50`, the largest step accepted.
    pub fn max_step(trajectory: &FrequencyTrajectory, scheme: Scheme) -> f64 {
        let omega = match scheme {
            Scheme::SplitOperatorZ => trajectory.max_omega_z(),
            Scheme::CrankNicolsonR | Scheme::Adi2D => {
                trajectory.radial_ratio() * trajectory.max_omega_z()
            }
        };
        2.0 * PI / omega / 50.0
    }

    /// The same schedule run backwards in time, `t -> t_f - t`.
    pub fn reversed(&self) -> Self {
        let t_f = self.trajectory.t_final();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                start: t_f - (s.start + s.dt * s.count as f64),
                ..*s
            })
            .collect();
        Self {
            segments,
            reversed: !self.reversed,
            ..self.clone()
        }
    }

    pub fn with_longitudinal_kinetic(mut self, kinetic: LongitudinalKinetic) -> Self {
        self.kinetic_z = kinetic;
        self
    }

    pub fn longitudinal_kinetic(&self) -> LongitudinalKinetic {
        self.kinetic_z
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn trajectory(&self) -> &FrequencyTrajectory {
        &self.trajectory
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn model(&self) -> PotentialModel {
        self.model
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn step_count(&self) -> usize {
        self.segments.iter().map(|s| s.count).sum()
    }

    pub fn largest_step(&self) -> f64 {
        self.segments.iter().map(|s| s.dt).fold(0.0, f64::max)
    }

    /// Depth `V0` at schedule time `t`.
    pub(crate) fn depth(&self, t: f64) -> f64 {
        let t = if self.reversed {
            self.trajectory.t_final() - t
        } else {
            t
        };
        self.trajectory.depth(t)
    }

    pub(crate) fn check_scheme(&self, scheme: Scheme) -> Result<()> {
        if self.scheme != scheme {
            return Err(Error::Domain {
                what: "propagation plan",
                reason: "scheme does not match the solver",
            });
        }
        Ok(())
    }
}

/// Numerics collected during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    /// Largest boundary density seen at any checkpoint.
    pub max_leakage: f64,
    /// Largest `V0(t) * max S` over the run, the stiffest potential phase
    /// rate the splitting had to resolve.
    pub max_local_energy: f64,
}

impl RunDiagnostics {
    pub(crate) fn start(norm: f64) -> Self {
        Self {
            steps: 0,
            initial_norm: norm,
            final_norm: norm,
            min_norm: norm,
            max_norm: norm,
            max_leakage: 0.0,
            max_local_energy: 0.0,
        }
    }

    pub(crate) fn record(&mut self, norm: f64, leakage: f64, t: f64) -> Result<()> {
        self.final_norm = norm;
        self.min_norm = self.min_norm.min(norm);
        self.max_norm = self.max_norm.max(norm);
        self.max_leakage = self.max_leakage.max(leakage);
        if leakage > LEAKAGE_LIMIT {
            return Err(Error::Leakage {
                leakage,
                time: t,
                limit: LEAKAGE_LIMIT,
            });
        }
        Ok(())
    }

    /// Largest relative norm excursion from the initial value.
    pub fn norm_drift(&self) -> f64 {
        ((self.max_norm - self.initial_norm).abs()).max((self.initial_norm - self.min_norm).abs())
            / self.initial_norm
    }
}

/// Outcome of one propagation measured against a target state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub final_norm: f64,
    pub min_norm: f64,
    pub norm_drift: f64,
    pub max_leakage: f64,
    pub max_local_energy: f64,
    pub steps: usize,
}

impl FidelityReport {
    pub fn new(fidelity: f64, diagnostics: &RunDiagnostics) -> Self {
        Self {
            fidelity,
            final_norm: diagnostics.final_norm,
            min_norm: diagnostics.min_norm,
            norm_drift: diagnostics.norm_drift(),
            max_leakage: diagnostics.max_leakage,
            max_local_energy: diagnostics.max_local_energy,
            steps: diagnostics.steps,
        }
    }
}

/// Either wavefunction shape, for [`fidelity`].
pub trait Overlap {
    fn overlap_with(&self, other: &Self) -> Result<Complex64>;
}

impl Overlap for Wavefunction1D {
    fn overlap_with(&self, other: &Self) -> Result<Complex64> {
        self.overlap(other)
    }
}

impl Overlap for Wavefunction2D {
    fn overlap_with(&self, other: &Self) -> Result<Complex64> {
        self.overlap(other)
    }
}

/// `|<a|b>|`.
pub fn fidelity<W: Overlap>(a: &W, b: &W) -> Result<f64> {
    Ok(a.overlap_with(b)?.norm())
}

/// Called with the schedule time and current state every `every` steps.
pub struct Observer<'a, W> {
    pub every: usize,
    pub callback: &'a mut dyn FnMut(f64, &W),
}

/// Propagated state with its run diagnostics.
#[derive(Debug, Clone)]
pub struct Propagated<W> {
    pub state: W,
    pub diagnostics: RunDiagnostics,
}

/// State types the Strang driver can advance.
pub(crate) trait Field {
    fn samples_mut(&mut self) -> &mut [Complex64];
    fn norm(&self) -> f64;
    fn leakage(&self) -> f64;
}

impl Field for Wavefunction1D {
    fn samples_mut(&mut self) -> &mut [Complex64] {
        self.data_mut()
    }
    fn norm(&self) -> f64 {
        Wavefunction1D::norm(self)
    }
    fn leakage(&self) -> f64 {
        self.boundary_density(LEAKAGE_WIDTH)
    }
}

impl Field for Wavefunction2D {
    fn samples_mut(&mut self) -> &mut [Complex64] {
        self.data_mut()
    }
    fn norm(&self) -> f64 {
        Wavefunction2D::norm(self)
    }
    fn leakage(&self) -> f64 {
        self.boundary_density(LEAKAGE_WIDTH)
    }
}

/// Multiplies by `exp(-i amount S)`.
fn apply_phase(data: &mut [Complex64], shape: &[f64], amount: f64) {
    if amount == 0.0 {
        return;
    }
    let turns = -amount / TAU;
    for (x, &s) in data.iter_mut().zip(shape) {
        *x *= cis_turns(turns * s);
    }
}

/// Runs the plan's step schedule as
/// `exp(-i V dt/2) K(dt) exp(-i V dt/2)` with `V = V0(t_mid) shape`,
/// merging adjacent half phases. `kinetic(segment, samples)` applies the
/// kinetic factor for that segment's step.
pub(crate) fn drive<W: Field>(
    plan: &PropagationPlan,
    state: &mut W,
    shape: &[f64],
    kinetic: &mut dyn FnMut(usize, &mut [Complex64]),
    mut observer: Option<&mut Observer<'_, W>>,
) -> Result<RunDiagnostics> {
    let peak = shape.iter().cloned().fold(0.0, f64::max);
    let total = plan.step_count();
    let mut diag = RunDiagnostics::start(state.norm());
    let mut pending = 0.0;
    let mut step = 0;
    for (index, seg) in plan.segments.iter().enumerate() {
        for k in 0..seg.count {
            let depth = plan.depth(seg.start + (k as f64 + 0.5) * seg.dt);
            let half = 0.5 * depth * seg.dt;
            diag.max_local_energy = diag.max_local_energy.max((depth * peak).abs());
            apply_phase(state.samples_mut(), shape, pending + half);
            kinetic(index, state.samples_mut());
            pending = half;
            step += 1;
            let observe = observer
                .as_ref()
                .is_some_and(|o| o.every > 0 && step % o.every == 0);
            if observe || should_check(step, total) {
                apply_phase(state.samples_mut(), shape, pending);
                pending = 0.0;
                let t = seg.start + (k + 1) as f64 * seg.dt;
                diag.record(state.norm(), state.leakage(), t)?;
                if observe {
                    if let Some(o) = observer.as_mut() {
                        (o.callback)(t, state);
                    }
                }
            }
        }
    }
    diag.steps = step;
    Ok(diag)
}

pub(crate) fn should_check(step: usize, total: usize) -> bool {
    step.is_multiple_of(CHECK_EVERY) || step == total
}
