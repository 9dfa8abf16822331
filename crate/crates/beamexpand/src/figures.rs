//! Tables behind each figure: fidelity sweeps, perturbative bounds,
//! radial frequency curves and overlap time series.

use beamexpand_core::grid::default_radial;
use beamexpand_core::perturbation::{
    adiabatic_amplitude, fidelity_first_order_bound, second_order_fidelity, PerturbationContext,
};
use beamexpand_core::propagate::{
    propagate_radial, Observer, PotentialModel, PropagationPlan, Scheme,
};
use beamexpand_core::protocol::{
    bang_bang_time, fast_adiabatic, invariant_quintic, min_attractive_tf, quintic_scaling,
    ExpansionTask, ProtocolKind, ScalingKind,
};
use beamexpand_core::spectral::{radial_eigenstate, radial_expanding_mode};
use beamexpand_core::trap::{AtomSpecies, BeamGeometry, SignPolicy};

use crate::error::{Context, Error, Result};
use crate::manifest::RunManifest;
use crate::scenario::{base_manifest, outcome_fields, run_many, Axis, PointOutcome, Scenario};
use crate::sweep::worker_budget;
use crate::table::{format_number, Cell, Table};

pub const WAISTS: [f64; 2] = [3e-6, 10e-6];
pub const WAVELENGTH: f64 = 1.06e-6;
pub const F0Z_HZ: f64 = 2500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FigureName {
    pub const ALL: [FigureName; 7] = [
        FigureName::Fig2a,
        FigureName::Fig2b,
        FigureName::Fig3,
        FigureName::Fig4,
        FigureName::Fig5,
        FigureName::Fig6,
        FigureName::Fig7,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureName::Fig2a => "fig2a",
            FigureName::Fig2b => "fig2b",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
            FigureName::Fig6 => "fig6",
            FigureName::Fig7 => "fig7",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    /// Replaces the default final-time sweep of fig2a, fig2b, fig4 and fig7.
    pub final_times: Option<Vec<f64>>,
    /// Scales the 2D point counts of fig7.
    pub resolution: f64,
    pub workers: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            final_times: None,
            resolution: 1.0,
            workers: worker_budget(),
        }
    }
}

impl FigureOptions {
    fn final_times(&self) -> Vec<f64> {
        self.final_times.clone().unwrap_or_else(default_final_times)
    }
}

/// 31 log-spaced final times from 0.2 to 3 ms.
pub fn default_final_times() -> Vec<f64> {
    let (lo, hi) = (0.2e-3_f64.ln(), 3e-3_f64.ln());
    (0..31)
        .map(|i| (lo + (hi - lo) * i as f64 / 30.0).exp())
        .collect()
}

/// SI task for the standard parameters (Rb-87, 1060 nm, 2500 Hz start).
pub fn standard_task(ffz_hz: f64, t_final: f64, waist: f64) -> Result<ExpansionTask> {
    let geometry = BeamGeometry::new(waist, WAVELENGTH).context(|| "beam geometry".into())?;
    ExpansionTask::from_hz(F0Z_HZ, ffz_hz, t_final, AtomSpecies::rubidium87(), geometry)
        .context(|| "expansion task".into())
}

pub fn figure(name: FigureName, opts: &FigureOptions) -> Result<Vec<Table>> {
    match name {
        FigureName::Fig2a => longitudinal_sweep("fig2a", 250.0, opts),
        FigureName::Fig2b => longitudinal_sweep("fig2b", 25.0, opts),
        FigureName::Fig3 => bounds_table(
            "fig3",
            25.0,
            2.5e-3,
            &WAISTS,
            &[0, 1, 2, 3, 4, 5],
            true,
            opts.workers,
        )
        .map(|t| vec![t]),
        FigureName::Fig4 => radial_sweep(opts),
        FigureName::Fig5 => radial_frequencies(0.36e-3, 3e-6, 361).map(|t| vec![t]),
        FigureName::Fig6 => overlap_series(0.6e-3, 3e-6, 240).map(|t| vec![t]),
        FigureName::Fig7 => cylindrical_sweep(opts),
    }
}

fn scenario(
    name: &str,
    ffz_hz: f64,
    protocol: ProtocolKind,
    axis: Axis,
    final_times: Vec<f64>,
) -> Result<Scenario> {
    let task = standard_task(ffz_hz, final_times[0], WAISTS[0])?;
    Ok(Scenario::new(name, task, protocol, axis)
        .with_waists(WAISTS.to_vec())
        .with_final_times(final_times))
}

/// Bang-bang ignores the requested duration; one point per waist.
fn bang_bang_scenario(name: &str, ffz_hz: f64, axis: Axis) -> Result<Scenario> {
    let task = standard_task(ffz_hz, 1e-3, WAISTS[0])?;
    let t_b = bang_bang_time(&task);
    scenario(name, ffz_hz, ProtocolKind::BangBang, axis, vec![t_b])
}

fn figure_manifest(name: &str, ffz_hz: f64) -> Result<RunManifest> {
    let task = standard_task(ffz_hz, 1e-3, WAISTS[0])?;
    base_manifest(name, &task)
}

/// Collects runs into one table; `extra` supplies the trailing cells of a
/// done point.
fn sweep_table(
    name: &str,
    ffz_hz: f64,
    runs: &[crate::scenario::ScenarioRun],
    extra_columns: &[(&str, &str)],
    mut extra: impl FnMut(&crate::scenario::ScenarioRun, &PointOutcome) -> Result<Vec<Cell>>,
) -> Result<Table> {
    let mut manifest = figure_manifest(name, ffz_hz)?;
    let mut columns = vec![
        ("point", "1"),
        ("protocol", "1"),
        ("axis", "1"),
        ("waist", "m"),
        ("t_f", "s"),
        ("protocol_time", "s"),
        ("fidelity", "1"),
        ("norm_drift", "1"),
    ];
    columns.extend_from_slice(extra_columns);
    columns.push(("status", "1"));
    let mut table = Table::new(name, &columns, RunManifest::new(name));
    let mut index = 0;
    for run in runs {
        for o in &run.outcomes {
            let p = o.point();
            let mut fields = vec![
                (
                    "protocol".to_string(),
                    run.scenario.protocol.name().to_string(),
                ),
                ("axis".to_string(), run.scenario.axis.name().to_string()),
            ];
            fields.extend(outcome_fields(o));
            manifest.entry(index, fields);
            let mut row: Vec<Cell> = vec![
                index.into(),
                run.scenario.protocol.name().into(),
                run.scenario.axis.name().into(),
                p.waist.into(),
                p.t_final.into(),
            ];
            match o {
                PointOutcome::Done(r) => {
                    row.push(r.protocol_time.into());
                    row.push(r.fidelity.into());
                    row.push(r.report.norm_drift.into());
                    row.extend(extra(run, o)?);
                    row.push("ok".into());
                }
                PointOutcome::Excluded { reason, .. } => {
                    row.extend(std::iter::repeat_n(Cell::Empty, 3 + extra_columns.len()));
                    row.push(format!("excluded: {reason}").into());
                }
            }
            table.push(row);
            index += 1;
        }
    }
    manifest.number("trap.ffz_hz", ffz_hz);
    table.manifest = manifest;
    Ok(table)
}

fn longitudinal_sweep(name: &str, ffz_hz: f64, opts: &FigureOptions) -> Result<Vec<Table>> {
    let tf = opts.final_times();
    let scenarios = vec![
        scenario(
            name,
            ffz_hz,
            ProtocolKind::Invariant,
            Axis::Longitudinal,
            tf.clone(),
        )?,
        scenario(
            name,
            ffz_hz,
            ProtocolKind::FastAdiabatic,
            Axis::Longitudinal,
            tf,
        )?,
        bang_bang_scenario(name, ffz_hz, Axis::Longitudinal)?,
    ];
    let runs = run_many(&scenarios, opts.workers)?;
    let mut table = sweep_table(name, ffz_hz, &runs, &[], |_, _| Ok(Vec::new()))?;
    let task = standard_task(ffz_hz, 1e-3, WAISTS[0])?;
    let threshold = min_attractive_tf(&task, ScalingKind::Quintic).context(|| name.into())?;
    table.manifest.number("min_attractive_tf_s", threshold);
    Ok(vec![table])
}

fn radial_sweep(opts: &FigureOptions) -> Result<Vec<Table>> {
    let name = "fig4";
    let tf = opts.final_times();
    let scenarios = vec![
        scenario(
            name,
            250.0,
            ProtocolKind::Invariant,
            Axis::Radial,
            tf.clone(),
        )?,
        scenario(name, 250.0, ProtocolKind::FastAdiabatic, Axis::Radial, tf)?,
        bang_bang_scenario(name, 250.0, Axis::Radial)?,
    ];
    let runs = run_many(&scenarios, opts.workers)?;
    let mut table = sweep_table(
        name,
        250.0,
        &runs,
        &[("adiabatic_estimate", "1")],
        |run, o| {
            let p = o.point();
            let si = run.scenario.task_for(p)?;
            let (task, _) = si.to_trap_units().context(|| name.into())?;
            let traj = crate::scenario::build_trajectory(
                run.scenario.protocol,
                &task,
                SignPolicy::AttractiveOnly,
            )
            .context(|| name.into())?;
            let a = adiabatic_amplitude(&traj, traj.t_final()).context(|| name.into())?;
            Ok(vec![a.fidelity().into()])
        },
    )?;
    let task = standard_task(250.0, 1e-3, WAISTS[0])?;
    let threshold = min_attractive_tf(&task, ScalingKind::Quintic).context(|| name.into())?;
    table.manifest.number("min_attractive_tf_s", threshold);
    Ok(vec![table])
}

fn cylindrical_sweep(opts: &FigureOptions) -> Result<Vec<Table>> {
    let name = "fig7";
    let tf = opts.final_times();
    let mut three_d = vec![
        scenario(
            name,
            250.0,
            ProtocolKind::Invariant,
            Axis::Cylindrical,
            tf.clone(),
        )?,
        scenario(
            name,
            250.0,
            ProtocolKind::FastAdiabatic,
            Axis::Cylindrical,
            tf.clone(),
        )?,
        bang_bang_scenario(name, 250.0, Axis::Cylindrical)?,
    ];
    for s in &mut three_d {
        s.numerics.resolution = opts.resolution;
    }
    let references = vec![
        scenario(
            name,
            250.0,
            ProtocolKind::Invariant,
            Axis::Radial,
            tf.clone(),
        )?,
        scenario(
            name,
            250.0,
            ProtocolKind::FastAdiabatic,
            Axis::Longitudinal,
            tf,
        )?,
        bang_bang_scenario(name, 250.0, Axis::Radial)?,
    ];
    let mut all = three_d;
    all.extend(references);
    let runs = run_many(&all, opts.workers)?;
    let (main, refs) = runs.split_at(3);
    let mut table = sweep_table(
        name,
        250.0,
        main,
        &[("fidelity_1d", "1"), ("reference_axis", "1")],
        |run, o| {
            let k = main
                .iter()
                .position(|m| m.scenario.protocol == run.scenario.protocol)
                .expect("reference for every protocol");
            let reference = &refs[k];
            let f1d = reference.outcomes[o.point().index]
                .result()
                .map(|r| r.fidelity);
            Ok(vec![f1d.into(), reference.scenario.axis.name().into()])
        },
    )?;
    table.manifest.number("grid.resolution", opts.resolution);
    Ok(vec![table])
}

/// First-order bound, quintic-bracket bound, `1 - |f1|`, second-order
/// estimate and (optionally) the numeric fidelity per level and waist.
pub fn bounds_table(
    name: &str,
    ffz_hz: f64,
    t_final: f64,
    waists: &[f64],
    levels: &[usize],
    numeric: bool,
    workers: usize,
) -> Result<Table> {
    let mut manifest = figure_manifest(name, ffz_hz)?;
    manifest.number("trap.ffz_hz", ffz_hz);
    manifest.number("protocol.tf_s", t_final);
    let numeric_runs = if numeric {
        let task = standard_task(ffz_hz, t_final, waists[0])?;
        let s = Scenario::new(name, task, ProtocolKind::Invariant, Axis::Longitudinal)
            .with_waists(waists.to_vec())
            .with_levels(levels.to_vec());
        Some(run_many(&[s], workers)?.remove(0))
    } else {
        None
    };
    let mut table = Table::new(
        name,
        &[
            ("point", "1"),
            ("waist", "m"),
            ("n", "1"),
            ("bound", "1"),
            ("bound_quintic", "1"),
            ("first_order_estimate", "1"),
            ("second_order_estimate", "1"),
            ("numeric_fidelity", "1"),
        ],
        RunManifest::new(name),
    );
    let mut index = 0;
    for &waist in waists {
        let task = standard_task(ffz_hz, t_final, waist)?;
        for &n in levels {
            let ctx = PerturbationContext::quintic(&task, n).context(|| name.into())?;
            let b = fidelity_first_order_bound(&ctx).context(|| name.into())?;
            let second = second_order_fidelity(&ctx).context(|| name.into())?;
            let num = numeric_runs
                .as_ref()
                .and_then(|r| r.outcomes[index].result().map(|r| r.fidelity));
            manifest.entry(
                index,
                vec![
                    ("waist_m".into(), format_number(waist)),
                    ("n".into(), n.to_string()),
                    ("bound".into(), format_number(b.bound)),
                    ("second_order".into(), format_number(second)),
                    ("numeric".into(), num.map_or("-".into(), format_number)),
                ],
            );
            table.push(vec![
                index.into(),
                waist.into(),
                n.into(),
                b.bound.into(),
                b.bound_quintic.into(),
                b.estimate.into(),
                second.into(),
                num.into(),
            ]);
            index += 1;
        }
    }
    table.manifest = manifest;
    Ok(table)
}

/// `omega_R^2(t)` of the quintic protocol, of the ideal radial inverse
/// engineering with the same `b`, and of the fast adiabatic ramp.
pub fn radial_frequencies(t_final: f64, waist: f64, samples: usize) -> Result<Table> {
    let name = "fig5";
    let si = standard_task(250.0, t_final, waist)?;
    let (task, units) = si.to_trap_units().context(|| name.into())?;
    let actual = invariant_quintic(&task, SignPolicy::AllowRepulsive).context(|| name.into())?;
    let fast = fast_adiabatic(&task).context(|| name.into())?;
    let mut manifest = base_manifest(name, &si)?;
    manifest.number("beam.waist_m", waist);
    manifest.number("protocol.tf_s", t_final);
    let mut table = Table::new(
        name,
        &[
            ("t", "s"),
            ("omega_z_sq", "rad^2/s^2"),
            ("omega_r_sq_actual", "rad^2/s^2"),
            ("omega_r_sq_ideal", "rad^2/s^2"),
            ("omega_r_sq_fast_adiabatic", "rad^2/s^2"),
        ],
        RunManifest::new(name),
    );
    let w2 = |x: f64| units.frequency_to_si(units.frequency_to_si(x));
    for i in 0..samples {
        let t = task.t_final() * i as f64 / (samples - 1) as f64;
        table.push(vec![
            units.time_to_si(t).into(),
            w2(actual.omega_z_sq(t)).into(),
            w2(actual.omega_r_sq(t)).into(),
            actual.omega_r_ideal_sq(t).map(w2).into(),
            w2(fast.omega_r_sq(t)).into(),
        ]);
    }
    table.manifest = manifest;
    Ok(table)
}

/// Overlap of the state evolved with the harmonic radial Hamiltonian at
/// the actual `omega_R(t)` with the instantaneous ground state and with
/// the expanding mode of the ideal radial frequency.
pub fn overlap_series(t_final: f64, waist: f64, samples: usize) -> Result<Table> {
    let name = "fig6";
    let si = standard_task(250.0, t_final, waist)?;
    let (task, units) = si.to_trap_units().context(|| name.into())?;
    let traj = invariant_quintic(&task, SignPolicy::AttractiveOnly).context(|| name.into())?;
    let scaling = quintic_scaling(&task).context(|| name.into())?;
    let kappa = task.geometry().radial_ratio();
    let plan = PropagationPlan::new(
        traj.clone(),
        Scheme::CrankNicolsonR,
        PotentialModel::Harmonic,
        None,
    )
    .context(|| name.into())?;
    let grid = default_radial(kappa, task.gamma()).context(|| name.into())?;
    let psi = radial_eigenstate(0, kappa, &grid).context(|| name.into())?;
    let every = (plan.step_count() / samples).max(1);
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let mut failure = None;
    let mut record = |t: f64, state: &beamexpand_core::grid::Wavefunction1D| {
        let st = scaling.at(t);
        let pair = radial_eigenstate(0, traj.omega_r(t), &grid).and_then(|inst| {
            let mode = radial_expanding_mode(kappa, st.b, st.db, &grid)?;
            Ok((inst.overlap(state)?.norm(), mode.overlap(state)?.norm()))
        });
        match pair {
            Ok((a, b)) => rows.push((t, a, b)),
            Err(e) => failure = Some(e),
        }
    };
    let mut observer = Observer {
        every,
        callback: &mut record,
    };
    propagate_radial(&psi, &plan, 0, Some(&mut observer)).context(|| name.into())?;
    if let Some(e) = failure {
        return Err(Error::run(name, e));
    }
    let mut manifest = base_manifest(name, &si)?;
    manifest.number("beam.waist_m", waist);
    manifest.number("protocol.tf_s", t_final);
    manifest.parameter("model.potential", "harmonic");
    let min_a = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let min_b = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    manifest.number("min_instantaneous_overlap", min_a);
    manifest.number("min_expanding_mode_overlap", min_b);
    let mut table = Table::new(
        name,
        &[
            ("t", "s"),
            ("instantaneous_overlap", "1"),
            ("expanding_mode_overlap", "1"),
        ],
        RunManifest::new(name),
    );
    for (t, a, b) in rows {
        table.push(vec![units.time_to_si(t).into(), a.into(), b.into()]);
    }
    table.manifest = manifest;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_spans_the_figures() {
        let tf = default_final_times();
        assert_eq!(tf.len(), 31);
        assert!((tf[0] - 0.2e-3).abs() < 1e-15);
        assert!((tf[30] - 3e-3).abs() < 1e-15);
        assert!(tf.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn names_round_trip() {
        for f in FigureName::ALL {
            assert_eq!(FigureName::parse(f.name()), Some(f));
        }
        assert_eq!(FigureName::parse("fig8"), None);
    }

    #[test]
    fn fig5_actual_curve_is_kappa_squared_omega_z() {
        let t = radial_frequencies(0.36e-3, 3e-6, 37).unwrap();
        let kappa = BeamGeometry::new(3e-6, WAVELENGTH).unwrap().radial_ratio();
        let expect = (2f64.sqrt() * std::f64::consts::PI * 3e-6 / WAVELENGTH).powi(2);
        assert!((kappa * kappa / expect - 1.0).abs() < 1e-12);
        for (wz, wr) in t
            .numbers("omega_z_sq")
            .iter()
            .zip(t.numbers("omega_r_sq_actual"))
        {
            assert!((wr - expect * wz).abs() <= 1e-9 * wr.abs().max(1.0));
        }
    }

    #[test]
    fn bounds_table_without_numerics() {
        let t = bounds_table("b", 25.0, 2.5e-3, &[3e-6], &[0, 5], false, 1).unwrap();
        let bound = t.numbers("bound");
        assert!((bound[0] - 0.9944).abs() < 1e-3);
        assert!((bound[1] - 0.661).abs() < 1e-2);
        assert!(t.to_csv().contains("numeric_fidelity"));
    }
}
