//! Scenarios: one task and protocol swept over waists, levels and final
//! times. Each point is an isolated run from a numeric eigenstate of the
//! initial trap to the matching eigenstate of the final trap.

use beamexpand_core::grid::{default_longitudinal, default_radial, Grid1D, Grid2D};
use beamexpand_core::propagate::{
    fidelity, ground_state_2d, propagate_3d, propagate_longitudinal, propagate_radial,
    FidelityReport, GroundStateOptions, PotentialModel, PropagationPlan, Scheme,
};
use beamexpand_core::protocol::{
    bang_bang, fast_adiabatic, invariant_quintic, static_trap, ExpansionTask, FrequencyTrajectory,
    ProtocolKind,
};
use beamexpand_core::spectral::stationary_state_numeric;
use beamexpand_core::trap::{longitudinal_shape, radial_shape, BeamGeometry, SignPolicy};
use beamexpand_core::units::TrapUnits;
use beamexpand_core::Error as CoreError;

use crate::error::{Context, Error, Result};
use crate::manifest::RunManifest;
use crate::sweep::sweep_parallel;
use crate::table::{format_number, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Longitudinal,
    Radial,
    Cylindrical,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Longitudinal => "z",
            Axis::Radial => "r",
            Axis::Cylindrical => "3d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "z" | "longitudinal" => Some(Axis::Longitudinal),
            "r" | "radial" => Some(Axis::Radial),
            "3d" | "cylindrical" => Some(Axis::Cylindrical),
            _ => None,
        }
    }
}

/// Overrides of the default discretization. Grid sizes and `dt` are used
/// as given; `resolution` scales the default point counts of 2D grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub nz: Option<usize>,
    pub nr: Option<usize>,
    /// seconds
    pub dt: Option<f64>,
    pub resolution: f64,
    pub model: PotentialModel,
    /// Defaults to true along `z` only; a repulsive stretch has no radial
    /// bound state.
    pub allow_repulsive: Option<bool>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            nz: None,
            nr: None,
            dt: None,
            resolution: 1.0,
            model: PotentialModel::Full,
            allow_repulsive: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    /// SI inputs; its waist and duration are replaced per point.
    pub task: ExpansionTask,
    pub protocol: ProtocolKind,
    pub waists: Vec<f64>,
    pub levels: Vec<usize>,
    pub nu: i32,
    pub axis: Axis,
    pub final_times: Vec<f64>,
    pub numerics: Numerics,
}

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub index: usize,
    pub waist: f64,
    pub level: usize,
    pub t_final: f64,
}

/// Discretization actually used, in SI lengths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridInfo {
    pub nz: usize,
    pub nr: usize,
    pub z_half_width: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub point: Point,
    /// Bang-bang fixes its own duration, so this can differ from
    /// `point.t_final`.
    pub protocol_time: f64,
    pub fidelity: f64,
    pub report: FidelityReport,
    pub grid: GridInfo,
    /// seconds
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointOutcome {
    Done(PointResult),
    /// The physics excludes the point, e.g. a repulsive trap.
    Excluded {
        point: Point,
        reason: String,
    },
}

impl PointOutcome {
    pub fn point(&self) -> &Point {
        match self {
            PointOutcome::Done(r) => &r.point,
            PointOutcome::Excluded { point, .. } => point,
        }
    }

    pub fn result(&self) -> Option<&PointResult> {
        match self {
            PointOutcome::Done(r) => Some(r),
            PointOutcome::Excluded { .. } => None,
        }
    }
}

fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] < w[1])
}

impl Scenario {
    /// Single point at the task's own waist and duration.
    pub fn new(name: &str, task: ExpansionTask, protocol: ProtocolKind, axis: Axis) -> Self {
        Self {
            name: name.to_string(),
            task,
            protocol,
            waists: vec![task.geometry().waist()],
            levels: vec![0],
            nu: 0,
            axis,
            final_times: vec![task.t_final()],
            numerics: Numerics::default(),
        }
    }

    pub fn with_final_times(mut self, final_times: Vec<f64>) -> Self {
        self.final_times = final_times;
        self
    }

    pub fn with_waists(mut self, waists: Vec<f64>) -> Self {
        self.waists = waists;
        self
    }

    pub fn with_levels(mut self, levels: Vec<usize>) -> Self {
        self.levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(Error::Usage(format!("scenario `{}`: {m}", self.name)));
        if self.waists.is_empty() || self.levels.is_empty() || self.final_times.is_empty() {
            return usage("waist, level and final-time lists must be non-empty");
        }
        if !strictly_increasing(&self.final_times) || !strictly_increasing(&self.waists) {
            return usage("final times and waists must be strictly increasing");
        }
        if !self.levels.windows(2).all(|w| w[0] < w[1]) {
            return usage("levels must be strictly increasing");
        }
        if self
            .waists
            .iter()
            .chain(&self.final_times)
            .any(|&x| !(x > 0.0 && x.is_finite()))
        {
            return usage("waists and final times must be positive");
        }
        if self.axis == Axis::Cylindrical && self.levels != [0] {
            return usage("3d runs start from the ground state (state.n = 0)");
        }
        if self.numerics.resolution.is_nan() || self.numerics.resolution <= 0.0 {
            return usage("grid.resolution must be positive");
        }
        Ok(())
    }

    /// Waist-major, then level, then final time.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &waist in &self.waists {
            for &level in &self.levels {
                for &t_final in &self.final_times {
                    out.push(Point {
                        index: out.len(),
                        waist,
                        level,
                        t_final,
                    });
                }
            }
        }
        out
    }

    pub fn sign_policy(&self) -> SignPolicy {
        let allow = self
            .numerics
            .allow_repulsive
            .unwrap_or(self.axis == Axis::Longitudinal);
        if allow {
            SignPolicy::AllowRepulsive
        } else {
            SignPolicy::AttractiveOnly
        }
    }

    /// SI task of one point.
    pub fn task_for(&self, point: &Point) -> Result<ExpansionTask> {
        let geometry = BeamGeometry::new(point.waist, self.task.geometry().wavelength())
            .context(|| self.context(point))?;
        ExpansionTask::new(
            self.task.omega0(),
            self.task.omegaf(),
            point.t_final,
            self.task.atom(),
            geometry,
        )
        .context(|| self.context(point))
    }

    fn context(&self, p: &Point) -> String {
        format!(
            "{} point {} ({}, w0 = {} m, n = {}, t_f = {} s)",
            self.name,
            p.index,
            self.protocol.name(),
            format_number(p.waist),
            p.level,
            format_number(p.t_final)
        )
    }
}

/// Protocol trajectory for a trap-unit task.
pub fn build_trajectory(
    kind: ProtocolKind,
    task: &ExpansionTask,
    policy: SignPolicy,
) -> std::result::Result<FrequencyTrajectory, CoreError> {
    match kind {
        ProtocolKind::Invariant => invariant_quintic(task, policy),
        ProtocolKind::BangBang => Ok(bang_bang(task)),
        ProtocolKind::FastAdiabatic => fast_adiabatic(task),
        ProtocolKind::Static => static_trap(task, task.t_final()),
    }
}

/// Largest width scaling the grids must hold.
fn envelope(task: &ExpansionTask) -> f64 {
    task.gamma().max(1.0)
}

/// Default 2D grid in trap units: extent eight initial widths times
/// `b_max` on both axes, eight points per initial width times
/// `resolution`.
pub fn cylindrical_grid(
    kappa: f64,
    b_max: f64,
    resolution: f64,
    nr: Option<usize>,
    nz: Option<usize>,
) -> std::result::Result<Grid2D, CoreError> {
    let width_r = 1.0 / kappa.sqrt();
    let r_max = 8.0 * width_r * b_max;
    let half = 8.0 * b_max;
    let per_width = 8.0 * resolution;
    let nr = nr.unwrap_or((r_max / width_r * per_width).ceil() as usize);
    let nz = nz.unwrap_or((2.0 * half * per_width).ceil() as usize);
    Grid2D::new(Grid1D::radial(nr, r_max)?, Grid1D::longitudinal(nz, half)?)
}

fn potential_z(model: PotentialModel, depth: f64, geometry: BeamGeometry) -> impl Fn(f64) -> f64 {
    move |z| match model {
        PotentialModel::Full => depth * longitudinal_shape(z, &geometry),
        PotentialModel::Harmonic => depth * z * z / geometry.rayleigh_range().powi(2),
    }
}

fn potential_r(model: PotentialModel, depth: f64, geometry: BeamGeometry) -> impl Fn(f64) -> f64 {
    move |r| match model {
        PotentialModel::Full => depth * radial_shape(r, &geometry),
        PotentialModel::Harmonic => 2.0 * depth * r * r / geometry.waist().powi(2),
    }
}

/// Runs one point.
pub fn run_point(scenario: &Scenario, point: &Point) -> Result<PointResult> {
    let ctx = || scenario.context(point);
    let si = scenario.task_for(point)?;
    let (task, units) = si.to_trap_units().context(ctx)?;
    let traj = build_trajectory(scenario.protocol, &task, scenario.sign_policy()).context(ctx)?;
    let protocol_time = units.time_to_si(traj.t_final());
    let dt = scenario.numerics.dt.map(|d| units.time_to_trap(d));
    let model = scenario.numerics.model;
    let geometry = task.geometry();
    let b_max = envelope(&task);
    let v0 = traj.depth(0.0);
    let vf = traj.depth(traj.t_final());
    let n = point.level;
    let nu = scenario.nu;

    let (fid, report, grid, step) = match scenario.axis {
        Axis::Longitudinal => {
            let plan =
                PropagationPlan::new(traj, Scheme::SplitOperatorZ, model, dt).context(ctx)?;
            let mut grid = default_longitudinal(n, b_max, 1.0).context(ctx)?;
            if let Some(nz) = scenario.numerics.nz {
                grid = Grid1D::longitudinal(nz, grid.extent().1).context(ctx)?;
            }
            let (psi, _) = stationary_state_numeric(potential_z(model, v0, geometry), &grid, 0, n)
                .context(ctx)?;
            let (target, _) =
                stationary_state_numeric(potential_z(model, vf, geometry), &grid, 0, n)
                    .context(ctx)?;
            let out = propagate_longitudinal(&psi, &plan, None).context(ctx)?;
            let f = fidelity(&target, &out.state).context(ctx)?;
            let info = GridInfo {
                nz: grid.len(),
                z_half_width: units.length_to_si(grid.extent().1),
                ..GridInfo::default()
            };
            (
                f,
                FidelityReport::new(f, &out.diagnostics),
                info,
                plan.largest_step(),
            )
        }
        Axis::Radial => {
            let plan =
                PropagationPlan::new(traj, Scheme::CrankNicolsonR, model, dt).context(ctx)?;
            let mut grid = default_radial(geometry.radial_ratio(), b_max).context(ctx)?;
            if let Some(nr) = scenario.numerics.nr {
                grid = Grid1D::radial(nr, grid.extent().1).context(ctx)?;
            }
            let (psi, _) = stationary_state_numeric(potential_r(model, v0, geometry), &grid, nu, n)
                .context(ctx)?;
            let (target, _) =
                stationary_state_numeric(potential_r(model, vf, geometry), &grid, nu, n)
                    .context(ctx)?;
            let out = propagate_radial(&psi, &plan, nu, None).context(ctx)?;
            let f = fidelity(&target, &out.state).context(ctx)?;
            let info = GridInfo {
                nr: grid.len(),
                r_max: units.length_to_si(grid.extent().1),
                ..GridInfo::default()
            };
            (
                f,
                FidelityReport::new(f, &out.diagnostics),
                info,
                plan.largest_step(),
            )
        }
        Axis::Cylindrical => {
            let plan = PropagationPlan::new(traj, Scheme::Adi2D, model, dt).context(ctx)?;
            let grid = cylindrical_grid(
                geometry.radial_ratio(),
                b_max,
                scenario.numerics.resolution,
                scenario.numerics.nr,
                scenario.numerics.nz,
            )
            .context(ctx)?;
            let options = GroundStateOptions::default();
            let start = ground_state_2d(&grid, v0, &geometry, model, nu, options).context(ctx)?;
            let target = ground_state_2d(&grid, vf, &geometry, model, nu, options).context(ctx)?;
            let out = propagate_3d(&start.state, &plan, nu, None).context(ctx)?;
            let f = fidelity(&target.state, &out.state).context(ctx)?;
            let info = GridInfo {
                nz: grid.z.len(),
                nr: grid.r.len(),
                z_half_width: units.length_to_si(grid.z.extent().1),
                r_max: units.length_to_si(grid.r.extent().1),
            };
            (
                f,
                FidelityReport::new(f, &out.diagnostics),
                info,
                plan.largest_step(),
            )
        }
    };
    Ok(PointResult {
        point: *point,
        protocol_time,
        fidelity: fid,
        report,
        grid,
        dt: units.time_to_si(step),
    })
}

/// Outcomes of every point, in point order, with their manifest.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub outcomes: Vec<PointOutcome>,
    pub manifest: RunManifest,
}

/// Runs every point on up to `workers` threads. Physics-domain failures
/// (a repulsive trap, say) become excluded rows; any other failure aborts
/// the run with the point's context.
pub fn run_scenario(scenario: &Scenario, workers: usize) -> Result<ScenarioRun> {
    let mut runs = run_many(std::slice::from_ref(scenario), workers)?;
    Ok(runs.remove(0))
}

/// [`run_scenario`] for several scenarios sharing one worker pool.
pub fn run_many(scenarios: &[Scenario], workers: usize) -> Result<Vec<ScenarioRun>> {
    let mut jobs = Vec::new();
    for (k, s) in scenarios.iter().enumerate() {
        s.validate()?;
        jobs.extend(s.points().into_iter().map(|p| (k, p)));
    }
    let results = sweep_parallel(&jobs, workers, |_, (k, p)| run_point(&scenarios[*k], p));
    let mut outcomes: Vec<Vec<PointOutcome>> = scenarios.iter().map(|_| Vec::new()).collect();
    for ((k, point), result) in jobs.iter().zip(results) {
        let outcome = match result {
            Ok(r) => PointOutcome::Done(r),
            Err(Error::Run { source, .. }) if source.is_physics_domain() => {
                PointOutcome::Excluded {
                    point: *point,
                    reason: source.to_string(),
                }
            }
            Err(e) => return Err(e),
        };
        outcomes[*k].push(outcome);
    }
    scenarios
        .iter()
        .zip(outcomes)
        .map(|(s, outcomes)| {
            Ok(ScenarioRun {
                manifest: scenario_manifest(s, &outcomes)?,
                scenario: s.clone(),
                outcomes,
            })
        })
        .collect()
}

/// Resolved inputs and trap-unit conversions shared by the points.
pub fn base_manifest(name: &str, task: &ExpansionTask) -> Result<RunManifest> {
    let mut m = RunManifest::new(name);
    m.number("atom.mass_kg", task.atom().mass());
    m.number("laser.wavelength_m", task.geometry().wavelength());
    m.number("trap.omega0z_rad_s", task.omega0());
    m.number("trap.omegafz_rad_s", task.omegaf());
    let units = TrapUnits::new(task.omega0(), task.atom().mass())
        .map_err(|e| Error::run("trap units", e))?;
    m.unit("length_m", units.length());
    m.unit("time_s", units.time());
    m.unit("energy_j", units.energy());
    Ok(m)
}

fn scenario_manifest(scenario: &Scenario, outcomes: &[PointOutcome]) -> Result<RunManifest> {
    let mut m = base_manifest(&scenario.name, &scenario.task)?;
    m.parameter("protocol.kind", scenario.protocol.name());
    m.parameter("run.axis", scenario.axis.name());
    m.parameter("state.nu", scenario.nu);
    m.parameter(
        "model.potential",
        match scenario.numerics.model {
            PotentialModel::Full => "full",
            PotentialModel::Harmonic => "harmonic",
        },
    );
    for o in outcomes {
        m.entry(o.point().index, outcome_fields(o));
    }
    Ok(m)
}

pub(crate) fn outcome_fields(o: &PointOutcome) -> Vec<(String, String)> {
    let p = o.point();
    let mut f = vec![
        ("waist_m".to_string(), format_number(p.waist)),
        ("level".to_string(), p.level.to_string()),
        ("t_f_s".to_string(), format_number(p.t_final)),
    ];
    match o {
        PointOutcome::Done(r) => {
            f.push(("protocol_time_s".into(), format_number(r.protocol_time)));
            f.push(("fidelity".into(), format_number(r.fidelity)));
            f.push(("nz".into(), r.grid.nz.to_string()));
            f.push(("nr".into(), r.grid.nr.to_string()));
            f.push(("z_half_width_m".into(), format_number(r.grid.z_half_width)));
            f.push(("r_max_m".into(), format_number(r.grid.r_max)));
            f.push(("dt_s".into(), format_number(r.dt)));
            f.push(("steps".into(), r.report.steps.to_string()));
            f.push(("norm_drift".into(), format_number(r.report.norm_drift)));
            f.push(("max_leakage".into(), format_number(r.report.max_leakage)));
        }
        PointOutcome::Excluded { reason, .. } => {
            f.push(("excluded".into(), reason.replace(' ', "_")));
        }
    }
    f
}

impl ScenarioRun {
    pub fn table(&self) -> Table {
        let mut t = Table::new(
            &self.scenario.name,
            &[
                ("point", "1"),
                ("protocol", "1"),
                ("axis", "1"),
                ("waist", "m"),
                ("level", "1"),
                ("t_f", "s"),
                ("protocol_time", "s"),
                ("fidelity", "1"),
                ("norm_drift", "1"),
                ("max_leakage", "1"),
                ("steps", "1"),
                ("dt", "s"),
                ("nz", "1"),
                ("nr", "1"),
                ("status", "1"),
            ],
            self.manifest.clone(),
        );
        for o in &self.outcomes {
            let p = o.point();
            let mut row: Vec<Cell> = vec![
                p.index.into(),
                self.scenario.protocol.name().into(),
                self.scenario.axis.name().into(),
                p.waist.into(),
                p.level.into(),
                p.t_final.into(),
            ];
            match o {
                PointOutcome::Done(r) => row.extend([
                    r.protocol_time.into(),
                    r.fidelity.into(),
                    r.report.norm_drift.into(),
                    r.report.max_leakage.into(),
                    r.report.steps.into(),
                    r.dt.into(),
                    r.grid.nz.into(),
                    r.grid.nr.into(),
                    "ok".into(),
                ]),
                PointOutcome::Excluded { reason, .. } => {
                    row.extend(std::iter::repeat_n(Cell::Empty, 8));
                    row.push(format!("excluded: {reason}").into());
                }
            }
            t.push(row);
        }
        t
    }

    pub fn fidelities(&self) -> Vec<Option<f64>> {
        self.outcomes
            .iter()
            .map(|o| o.result().map(|r| r.fidelity))
            .collect()
    }
}
