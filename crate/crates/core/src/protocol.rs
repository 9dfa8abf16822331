//! Trap-frequency trajectories for expansions: inverse engineering from an
//! Ermakov scaling function, bang-bang, and the fast adiabatic ramp.
//!
//! Trajectories are analytic evaluators valid in whatever consistent unit
//! system the task was given in. Before `t = 0` the trap sits at the initial
//! frequency and after the final time at the final one.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, SQRT_2};
use core::fmt;

use crate::error::{positive, Error, Result};
use crate::trap::{AtomSpecies, BeamGeometry, SignPolicy};
use crate::units::TrapUnits;
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

/// The control problem: expand from `omega0` to `omegaf` in `t_final`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTask {
    omega0: f64,
    omegaf: f64,
    t_final: f64,
    gamma: f64,
    atom: AtomSpecies,
    geometry: BeamGeometry,
}

impl ExpansionTask {
    /// Angular frequencies in rad/s (or trap units), duration in s.
    pub fn new(
        omega0: f64,
        omegaf: f64,
        t_final: f64,
        atom: AtomSpecies,
        geometry: BeamGeometry,
    ) -> Result<Self> {
        let omega0 = positive("initial frequency", omega0)?;
        let omegaf = positive("final frequency", omegaf)?;
        let t_final = positive("final time", t_final)?;
        Ok(Self {
            omega0,
            omegaf,
            t_final,
            gamma: (omega0 / omegaf).sqrt(),
            atom,
            geometry,
        })
    }

    /// Frequencies given as ordinary frequencies in Hz.
    pub fn from_hz(
        f0: f64,
        ff: f64,
        t_final: f64,
        atom: AtomSpecies,
        geometry: BeamGeometry,
    ) -> Result<Self> {
        let two_pi = 2.0 * core::f64::consts::PI;
        Self::new(two_pi * f0, two_pi * ff, t_final, atom, geometry)
    }

    pub fn with_final_time(&self, t_final: f64) -> Result<Self> {
        Self::new(self.omega0, self.omegaf, t_final, self.atom, self.geometry)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omegaf(&self) -> f64 {
        self.omegaf
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// `sqrt(omega0 / omegaf)`, the final value of the scaling factor.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn atom(&self) -> AtomSpecies {
        self.atom
    }

    pub fn geometry(&self) -> BeamGeometry {
        self.geometry
    }

    /// The same task in trap units of its own initial frequency, together
    /// with the scales needed to convert results back.
    pub fn to_trap_units(&self) -> Result<(Self, TrapUnits)> {
        let units = TrapUnits::new(self.omega0, self.atom.mass())?;
        let task = Self::new(
            1.0,
            units.frequency_to_trap(self.omegaf),
            units.time_to_trap(self.t_final),
            AtomSpecies::new(1.0)?,
            self.geometry.rescaled(units.length()),
        )?;
        Ok((task, units))
    }
}

/// Which family a scaling function belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    Quintic,
    ConstantFrequency,
    OptimalBound,
    Custom,
}

/// `b` and its first three time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingState {
    pub b: f64,
    pub db: f64,
    pub d2b: f64,
    pub d3b: f64,
}

impl ScalingState {
    pub const IDENTITY: Self = Self {
        b: 1.0,
        db: 0.0,
        d2b: 0.0,
        d3b: 0.0,
    };
}

type CustomShape = Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Quintic { excess: f64 },
    ConstantFrequency { omega1: f64, amplitude: f64 },
    OptimalBound { slope: f64 },
    Custom(CustomShape),
}

/// Scaling factor `b(t)` on `[0, T]`, frozen at its endpoint values outside.
#[derive(Clone)]
pub struct ScalingFunction {
    shape: Shape,
    duration: f64,
}

impl fmt::Debug for ScalingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalingFunction")
            .field("kind", &self.kind())
            .field("duration", &self.duration)
            .finish()
    }
}

impl ScalingFunction {
    /// `b(s) = 6(g-1)s^5 - 15(g-1)s^4 + 10(g-1)s^3 + 1`, `s = t / T`.
    pub fn quintic(gamma: f64, duration: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        Ok(Self {
            shape: Shape::Quintic {
                excess: gamma - 1.0,
            },
            duration: positive("duration", duration)?,
        })
    }

    /// Width of a state released from a trap at `omega0` into one held at
    /// `omega1`: `b(t) = sqrt(A sin^2(omega1 t) + 1)`,
    /// `A = (omega0^2 - omega1^2) / omega1^2`. Lasts a quarter period.
    pub fn constant_frequency(omega0: f64, omega1: f64) -> Result<Self> {
        let omega0 = positive("initial frequency", omega0)?;
        let omega1 = positive("intermediate frequency", omega1)?;
        Ok(Self {
            shape: Shape::ConstantFrequency {
                omega1,
                amplitude: (omega0 * omega0 - omega1 * omega1) / (omega1 * omega1),
            },
            duration: FRAC_PI_2 / omega1,
        })
    }

    /// Variationally optimal `b(s) = sqrt(1 + (g^2 - 1) s)`. Its endpoint
    /// derivatives do not vanish, so it serves bounds only.
    pub fn optimal_bound(gamma: f64, duration: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        Ok(Self {
            shape: Shape::OptimalBound {
                slope: gamma * gamma - 1.0,
            },
            duration: positive("duration", duration)?,
        })
    }

    /// User-supplied `s -> [b, b', b'', b''']` with `s`-derivatives.
    pub fn custom<F>(duration: f64, shape: F) -> Result<Self>
    where
        F: Fn(f64) -> [f64; 4] + Send + Sync + 'static,
    {
        Ok(Self {
            shape: Shape::Custom(Arc::new(shape)),
            duration: positive("duration", duration)?,
        })
    }

    pub fn kind(&self) -> ScalingKind {
        match self.shape {
            Shape::Quintic { .. } => ScalingKind::Quintic,
            Shape::ConstantFrequency { .. } => ScalingKind::ConstantFrequency,
            Shape::OptimalBound { .. } => ScalingKind::OptimalBound,
            Shape::Custom(_) => ScalingKind::Custom,
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `[b, db/ds, d2b/ds2, d3b/ds3]` at `s` in `[0, 1]`.
    pub fn in_s(&self, s: f64) -> [f64; 4] {
        match &self.shape {
            Shape::Quintic { excess: g } => {
                let (s2, s3) = (s * s, s * s * s);
                [
                    g * (6.0 * s2 * s3 - 15.0 * s2 * s2 + 10.0 * s3) + 1.0,
                    30.0 * g * (s2 * s2 - 2.0 * s3 + s2),
                    60.0 * g * (2.0 * s3 - 3.0 * s2 + s),
                    60.0 * g * (6.0 * s2 - 6.0 * s + 1.0),
                ]
            }
            Shape::ConstantFrequency { .. } => {
                let st = self.at(s * self.duration);
                let t = self.duration;
                [st.b, st.db * t, st.d2b * t * t, st.d3b * t * t * t]
            }
            Shape::OptimalBound { slope: c } => {
                let b = (1.0 + c * s).sqrt();
                [
                    b,
                    c / (2.0 * b),
                    -c * c / (4.0 * b.powi(3)),
                    3.0 * c.powi(3) / (8.0 * b.powi(5)),
                ]
            }
            Shape::Custom(f) => f(s),
        }
    }

    /// `b` and its time derivatives at time `t`.
    pub fn at(&self, t: f64) -> ScalingState {
        if let Shape::ConstantFrequency { omega1, amplitude } = self.shape {
            let t = t.clamp(0.0, self.duration);
            let inside = t > 0.0 && t < self.duration;
            return constant_frequency_state(omega1, amplitude, t, inside);
        }
        let s = t / self.duration;
        if s <= 0.0 || s >= 1.0 {
            let b = self.in_s(s.clamp(0.0, 1.0))[0];
            return ScalingState {
                b,
                db: 0.0,
                d2b: 0.0,
                d3b: 0.0,
            };
        }
        let [b, b1, b2, b3] = self.in_s(s);
        let inv = 1.0 / self.duration;
        ScalingState {
            b,
            db: b1 * inv,
            d2b: b2 * inv * inv,
            d3b: b3 * inv * inv * inv,
        }
    }

    /// `b` at the end of the protocol.
    pub fn final_value(&self) -> f64 {
        self.in_s(1.0)[0]
    }
}

fn constant_frequency_state(omega: f64, amplitude: f64, t: f64, inside: bool) -> ScalingState {
    let sin1 = (omega * t).sin();
    let (sin2, cos2) = (2.0 * omega * t).sin_cos();
    let b = (amplitude * sin1 * sin1 + 1.0).sqrt();
    if !inside {
        // frozen outside the interval; at the far end the classical width
        // is momentarily stationary anyway
        return ScalingState {
            b,
            db: 0.0,
            d2b: 0.0,
            d3b: 0.0,
        };
    }
    // derivatives of u = b^2
    let u1 = amplitude * omega * sin2;
    let u2 = 2.0 * amplitude * omega * omega * cos2;
    let u3 = -4.0 * amplitude * omega.powi(3) * sin2;
    let db = u1 / (2.0 * b);
    let d2b = (u2 - 2.0 * db * db) / (2.0 * b);
    let d3b = (u3 - 6.0 * db * d2b) / (2.0 * b);
    ScalingState { b, db, d2b, d3b }
}

/// Which construction produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Invariant,
    BangBang,
    FastAdiabatic,
    /// Constant `omega0`, for stationarity checks.
    Static,
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::Invariant => "invariant",
            ProtocolKind::BangBang => "bang-bang",
            ProtocolKind::FastAdiabatic => "fast-adiabatic",
            ProtocolKind::Static => "static",
        }
    }
}

#[derive(Debug, Clone)]
enum Law {
    Invariant(ScalingFunction),
    /// `levels[i]` holds between `breakpoints[i - 1]` and `breakpoints[i]`.
    Steps(Vec<f64>),
    FastAdiabatic {
        rate: f64,
    },
}

/// Evaluable `omega_z(t)`, `V0(t)` and `omega_R(t)`.
#[derive(Debug, Clone)]
pub struct FrequencyTrajectory {
    kind: ProtocolKind,
    law: Law,
    omega0: f64,
    omegaf: f64,
    t_final: f64,
    breakpoints: Vec<f64>,
    geometry: BeamGeometry,
    radial_ratio: f64,
    mass: f64,
    min_omega_sq: (f64, f64),
}

impl FrequencyTrajectory {
    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omegaf(&self) -> f64 {
        self.omegaf
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Times of instantaneous frequency jumps, ordered.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `omega_R / omega_z`.
    pub fn radial_ratio(&self) -> f64 {
        self.radial_ratio
    }

    pub fn rayleigh_range(&self) -> f64 {
        self.geometry.rayleigh_range()
    }

    pub fn geometry(&self) -> &BeamGeometry {
        &self.geometry
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn scaling(&self) -> Option<&ScalingFunction> {
        match &self.law {
            Law::Invariant(b) => Some(b),
            _ => None,
        }
    }

    /// `(t, omega_z^2(t))` at the minimum over `[0, t_f]`.
    pub fn min_omega_sq(&self) -> (f64, f64) {
        self.min_omega_sq
    }

    pub fn is_attractive(&self) -> bool {
        self.min_omega_sq.1 >= 0.0
    }

    pub fn omega_z_sq(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.omega0 * self.omega0;
        }
        if t >= self.t_final {
            return self.omegaf * self.omegaf;
        }
        match &self.law {
            Law::Invariant(scaling) => {
                let st = scaling.at(t);
                self.omega0 * self.omega0 / st.b.powi(4) - st.d2b / st.b
            }
            Law::Steps(levels) => {
                let idx = self.breakpoints.iter().filter(|&&bp| bp < t).count();
                levels[idx].powi(2)
            }
            Law::FastAdiabatic { rate } => (self.omega0 / (1.0 - rate * t)).powi(2),
        }
    }

    /// Time derivative of `omega_z^2`; zero across jumps, which the
    /// breakpoint list reports separately.
    pub fn omega_z_sq_rate(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.t_final {
            return 0.0;
        }
        match &self.law {
            Law::Invariant(scaling) => {
                let st = scaling.at(t);
                -4.0 * self.omega0 * self.omega0 * st.db / st.b.powi(5) - st.d3b / st.b
                    + st.d2b * st.db / (st.b * st.b)
            }
            Law::Steps(_) => 0.0,
            Law::FastAdiabatic { rate } => {
                let d = 1.0 - rate * t;
                2.0 * self.omega0 * self.omega0 * rate / d.powi(3)
            }
        }
    }

    /// `omega_z`; a repulsive stretch is reported as `-sqrt(|omega_z^2|)`.
    pub fn omega_z(&self, t: f64) -> f64 {
        signed_sqrt(self.omega_z_sq(t))
    }

    /// `V0 = m omega_z^2 zR^2 / 2`.
    pub fn depth(&self, t: f64) -> f64 {
        0.5 * self.mass * self.omega_z_sq(t) * self.rayleigh_range().powi(2)
    }

    pub fn depth_rate(&self, t: f64) -> f64 {
        0.5 * self.mass * self.omega_z_sq_rate(t) * self.rayleigh_range().powi(2)
    }

    pub fn omega_r_sq(&self, t: f64) -> f64 {
        self.radial_ratio * self.radial_ratio * self.omega_z_sq(t)
    }

    pub fn omega_r(&self, t: f64) -> f64 {
        self.radial_ratio * self.omega_z(t)
    }

    /// Radial frequency an ideal radial inverse engineering with the same
    /// `b` would need: `kappa^2 omega0^2 / b^4 - b'' / b`.
    pub fn omega_r_ideal_sq(&self, t: f64) -> Option<f64> {
        let scaling = self.scaling()?;
        let st = scaling.at(t.clamp(0.0, self.t_final));
        let k2 = self.radial_ratio * self.radial_ratio;
        Some(k2 * self.omega0 * self.omega0 / st.b.powi(4) - st.d2b / st.b)
    }

    /// Largest `omega_z` reached on `[0, t_f]`, from the analytic law or a
    /// dense sampling.
    pub fn max_omega_z(&self) -> f64 {
        match &self.law {
            Law::Steps(levels) => levels.iter().cloned().fold(0.0, f64::max),
            Law::FastAdiabatic { .. } => self.omega0.max(self.omegaf),
            Law::Invariant(_) => {
                let n = 4000;
                (0..=n)
                    .map(|i| self.omega_z_sq(self.t_final * i as f64 / n as f64))
                    .fold(0.0, f64::max)
                    .sqrt()
            }
        }
    }

    /// The same trajectory stretched to a new waist (radial ratio and
    /// Rayleigh range change, `omega_z(t)` does not).
    pub fn with_geometry(&self, geometry: &BeamGeometry) -> Self {
        let mut out = self.clone();
        out.radial_ratio = geometry.radial_ratio();
        out.geometry = *geometry;
        out
    }
}

fn signed_sqrt(x: f64) -> f64 {
    if x >= 0.0 {
        x.sqrt()
    } else {
        -(-x).sqrt()
    }
}

fn frame(
    kind: ProtocolKind,
    law: Law,
    task: &ExpansionTask,
    t_final: f64,
    breakpoints: Vec<f64>,
) -> FrequencyTrajectory {
    let geometry = task.geometry();
    FrequencyTrajectory {
        kind,
        law,
        omega0: task.omega0(),
        omegaf: task.omegaf(),
        t_final,
        breakpoints,
        radial_ratio: geometry.radial_ratio(),
        geometry,
        mass: task.atom().mass(),
        min_omega_sq: (0.0, task.omegaf().powi(2).min(task.omega0().powi(2))),
    }
}

/// Minimum of `f` on `[0, 1]`: dense sampling, then golden-section search
/// around the best sample.
pub(crate) fn minimize_unit<F: Fn(f64) -> f64>(f: F, samples: usize) -> (f64, f64) {
    let mut best = (0.0, f(0.0));
    for i in 1..=samples {
        let s = i as f64 / samples as f64;
        let v = f(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    let h = 1.0 / samples as f64;
    let (mut a, mut b) = ((best.0 - h).max(0.0), (best.0 + h).min(1.0));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let (s, v) = if fc < fd { (c, fc) } else { (d, fd) };
    if v < best.1 {
        (s, v)
    } else {
        best
    }
}

/// Inverse-engineered trajectory `omega_z^2 = omega0^2 / b^4 - b'' / b`.
/// The protocol lasts the scaling function's duration.
pub fn omega_from_scaling(
    scaling: &ScalingFunction,
    task: &ExpansionTask,
    policy: SignPolicy,
) -> Result<FrequencyTrajectory> {
    let t_final = scaling.duration();
    let omega0 = task.omega0();
    let (s_min, _) = minimize_unit(
        |s| {
            let [b, _, b2, _] = scaling.in_s(s);
            if b <= 0.0 {
                return f64::NEG_INFINITY;
            }
            omega0 * omega0 / b.powi(4) - b2 / (b * t_final * t_final)
        },
        4000,
    );
    let [b_at, ..] = scaling.in_s(s_min);
    if b_at <= 0.0 {
        return Err(Error::Domain {
            what: "scaling function",
            reason: "b(s) must stay positive",
        });
    }
    let mut traj = frame(
        ProtocolKind::Invariant,
        Law::Invariant(scaling.clone()),
        task,
        t_final,
        Vec::new(),
    );
    let t_min = s_min * t_final;
    let interior = scaling.at(t_min.clamp(1e-300, t_final * (1.0 - 1e-15)));
    let w2 = omega0 * omega0 / interior.b.powi(4) - interior.d2b / interior.b;
    traj.min_omega_sq = (t_min, w2);
    if w2 < 0.0 && policy == SignPolicy::AttractiveOnly {
        return Err(Error::Attractivity {
            time: t_min,
            omega_sq: w2,
        });
    }
    Ok(traj)
}

/// Inverse engineering with the quintic scaling over the task's duration.
pub fn invariant_quintic(task: &ExpansionTask, policy: SignPolicy) -> Result<FrequencyTrajectory> {
    let scaling = quintic_scaling(task)?;
    omega_from_scaling(&scaling, task, policy)
}

pub fn quintic_scaling(task: &ExpansionTask) -> Result<ScalingFunction> {
    ScalingFunction::quintic(task.gamma(), task.t_final())
}

/// Single jump to `sqrt(omega0 omegaf)` held for a quarter of its period,
/// then a jump to `omegaf`. The task's own duration is ignored.
pub fn bang_bang(task: &ExpansionTask) -> FrequencyTrajectory {
    let omega1 = (task.omega0() * task.omegaf()).sqrt();
    let t_b = bang_bang_time(task);
    let mut traj = frame(
        ProtocolKind::BangBang,
        Law::Steps(vec![task.omega0(), omega1, task.omegaf()]),
        task,
        t_b,
        vec![0.0, t_b],
    );
    traj.min_omega_sq = (0.0, omega1.min(task.omegaf()).powi(2));
    traj
}

/// The initial trap held unchanged for `duration`.
pub fn static_trap(task: &ExpansionTask, duration: f64) -> Result<FrequencyTrajectory> {
    let duration = positive("duration", duration)?;
    let mut traj = frame(
        ProtocolKind::Static,
        Law::Steps(vec![task.omega0()]),
        task,
        duration,
        Vec::new(),
    );
    traj.omegaf = task.omega0();
    traj.min_omega_sq = (0.0, task.omega0().powi(2));
    Ok(traj)
}

/// `pi / (2 sqrt(omega0 omegaf))`.
pub fn bang_bang_time(task: &ExpansionTask) -> f64 {
    FRAC_PI_2 / (task.omega0() * task.omegaf()).sqrt()
}

/// Time a bang-bang design would need if it were built from the radial
/// frequencies: the longitudinal time divided by `omega_R / omega_z`.
pub fn bang_bang_radial_time(task: &ExpansionTask) -> f64 {
    bang_bang_time(task) / task.geometry().radial_ratio()
}

/// `omega_z(t) = omega0 / (1 - (omegaf - omega0) t / (t_f omegaf))`, which
/// keeps `omega_dot / omega^2` constant.
pub fn fast_adiabatic(task: &ExpansionTask) -> Result<FrequencyTrajectory> {
    let rate = (task.omegaf() - task.omega0()) / (task.t_final() * task.omegaf());
    // the denominator is linear in t, so checking both ends suffices
    if 1.0 - rate * task.t_final() <= 0.0 {
        return Err(Error::Domain {
            what: "fast adiabatic ramp",
            reason: "frequency diverges inside the protocol",
        });
    }
    let mut traj = frame(
        ProtocolKind::FastAdiabatic,
        Law::FastAdiabatic { rate },
        task,
        task.t_final(),
        Vec::new(),
    );
    let low = task.omega0().min(task.omegaf());
    traj.min_omega_sq = (
        if task.omegaf() < task.omega0() {
            task.t_final()
        } else {
            0.0
        },
        low * low,
    );
    Ok(traj)
}

/// Shortest duration for which the inverse-engineered trap stays
/// attractive. Only kinds whose shape in `s` does not depend on the
/// duration are accepted.
pub fn min_attractive_tf(task: &ExpansionTask, kind: ScalingKind) -> Result<f64> {
    let gamma = task.gamma();
    if (gamma - 1.0).abs() < 1e-15 {
        return Ok(0.0);
    }
    let shape = match kind {
        ScalingKind::Quintic => ScalingFunction::quintic(gamma, 1.0)?,
        ScalingKind::OptimalBound => ScalingFunction::optimal_bound(gamma, 1.0)?,
        _ => {
            return Err(Error::Domain {
                what: "scaling kind",
                reason: "shape must be independent of the duration",
            })
        }
    };
    let omega0 = task.omega0();
    let attractive = |t_f: f64| {
        let (_, v) = minimize_unit(
            |s| {
                let [b, _, b2, _] = shape.in_s(s);
                omega0 * omega0 / b.powi(4) - b2 / (b * t_f * t_f)
            },
            2000,
        );
        v >= 0.0
    };
    // bracket in seconds for SI tasks; rescaled so trap-unit tasks work too
    let unit = 2.0 * core::f64::consts::PI * 2500.0 / omega0;
    let (mut lo, mut hi) = (1e-6 * unit, 1e-1 * unit);
    if attractive(lo) {
        // a scaling that never needs a fast ramp, e.g. b'' <= 0
        return Ok(0.0);
    }
    let mut expansions = 0;
    while !attractive(hi) {
        hi *= 10.0;
        expansions += 1;
        if expansions > 12 {
            return Err(Error::NotConverged {
                what: "attractivity bracket",
                iterations: expansions,
            });
        }
    }
    while (hi - lo) > 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if attractive(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Direction for [`adiabaticity_margin`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Longitudinal,
    Radial,
}

/// Worst adiabaticity ratio over the protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityMargin {
    pub max: f64,
    pub at: f64,
    /// The trajectory has jumps, which are non-adiabatic by construction.
    pub has_jumps: bool,
}

/// `max_t sqrt(2) |omega_z'| / (8 omega_z^2)` longitudinally or
/// `max_t |omega_R'| / (4 omega_R^2)` radially, using one-sided derivatives
/// between breakpoints.
pub fn adiabaticity_margin(traj: &FrequencyTrajectory, direction: Direction) -> AdiabaticityMargin {
    let prefactor = match direction {
        Direction::Longitudinal => SQRT_2 / 8.0,
        Direction::Radial => 0.25 / traj.radial_ratio(),
    };
    let n = 20_000;
    let mut best = (0.0, 0.0);
    for i in 0..n {
        let t = traj.t_final() * (i as f64 + 0.5) / n as f64;
        let w2 = traj.omega_z_sq(t);
        if w2 <= 0.0 {
            continue;
        }
        // omega' / omega^2 = (omega^2)' / (2 omega^3)
        let ratio = traj.omega_z_sq_rate(t).abs() / (2.0 * w2 * w2.sqrt());
        if ratio > best.0 {
            best = (ratio, t);
        }
    }
    AdiabaticityMargin {
        max: prefactor * best.0,
        at: best.1,
        has_jumps: !traj.breakpoints().is_empty(),
    }
}
