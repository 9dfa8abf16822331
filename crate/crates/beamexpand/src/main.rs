use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beamexpand::check::run_checks;
use beamexpand::config::Config;
use beamexpand::figures::{bounds_table, figure, FigureName, FigureOptions};
use beamexpand::scenario::{build_trajectory, run_scenario, Axis};
use beamexpand::sweep::worker_budget;
use beamexpand::table::Table;
use beamexpand::{Error, Result};

#[derive(Parser)]
#[command(
    name = "beamexpand",
    version,
    about = "Fast expansions of atoms in a Gaussian-beam trap"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set protocol.tf_s=1e-3`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory for CSV and manifest files; stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the trap-frequency trajectory of the configured protocol
    Protocol {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Longitudinal runs over the configured sweep
    ExpandZ {
        #[command(flatten)]
        common: Common,
    },
    /// Radial runs over the configured sweep
    ExpandR {
        #[command(flatten)]
        common: Common,
    },
    /// Coupled 3D (r, z) ground-state runs over the configured sweep
    Expand3d {
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate the tables behind one figure
    Figure {
        /// fig2a, fig2b, fig3, fig4, fig5, fig6 or fig7
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated final times in seconds
        #[arg(long, value_delimiter = ',')]
        tf: Option<Vec<f64>>,
        /// Scale of the 2D grids
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
    },
    /// Perturbative bounds and estimates per level and waist
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Also propagate each level numerically
        #[arg(long)]
        numeric: bool,
    },
    /// Numerical property suite; fails with exit code 1
    Check {
        /// Scale of the 2D grid of the separability check
        #[arg(long, default_value_t = 0.5)]
        resolution: f64,
    },
}

fn load(common: &Common) -> Result<Config> {
    let mut config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for o in &common.overrides {
        config.set(o)?;
    }
    Ok(config)
}

fn emit(tables: &[Table], out: Option<&Path>) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for t in tables {
                let path = t.write(dir)?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for t in tables {
                stdout.write_all(t.to_csv().as_bytes())?;
            }
        }
    }
    Ok(())
}

fn expand(common: &Common, axis: Axis) -> Result<()> {
    let mut scenario = load(common)?.scenario()?;
    scenario.axis = axis;
    let run = run_scenario(&scenario, worker_budget())?;
    emit(&[run.table()], common.out.as_deref())
}

fn protocol(common: &Common, samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::Usage("--samples must be at least 2".into()));
    }
    let scenario = load(common)?.scenario()?;
    let mut tables = Vec::new();
    for p in scenario.points() {
        let si = scenario.task_for(&p)?;
        let (task, units) = si
            .to_trap_units()
            .map_err(|e| Error::run("trap units", e))?;
        let traj = build_trajectory(scenario.protocol, &task, scenario.sign_policy())
            .map_err(|e| Error::run(format!("{} point {}", scenario.name, p.index), e))?;
        let name = format!("{}-protocol-{}", scenario.name, p.index);
        let mut manifest = beamexpand::scenario::base_manifest(&name, &si)?;
        manifest.parameter("protocol.kind", scenario.protocol.name());
        manifest.number("beam.waist_m", p.waist);
        manifest.number("protocol.tf_s", units.time_to_si(traj.t_final()));
        let mut table = Table::new(
            &name,
            &[
                ("t", "s"),
                ("omega_z_sq", "rad^2/s^2"),
                ("omega_r_sq", "rad^2/s^2"),
                ("b", "1"),
            ],
            manifest,
        );
        let w2 = |x: f64| units.frequency_to_si(units.frequency_to_si(x));
        for i in 0..samples {
            let t = traj.t_final() * i as f64 / (samples - 1) as f64;
            let b = traj.scaling().map(|s| s.at(t).b);
            table.push(vec![
                units.time_to_si(t).into(),
                w2(traj.omega_z_sq(t)).into(),
                w2(traj.omega_r_sq(t)).into(),
                b.into(),
            ]);
        }
        tables.push(table);
    }
    emit(&tables, common.out.as_deref())
}

fn bounds(common: &Common, numeric: bool) -> Result<()> {
    let scenario = load(common)?.scenario()?;
    let ffz = scenario.task.omegaf() / (2.0 * std::f64::consts::PI);
    let mut tables = Vec::new();
    for (k, &tf) in scenario.final_times.iter().enumerate() {
        let name = match scenario.final_times.len() {
            1 => format!("{}-bounds", scenario.name),
            _ => format!("{}-bounds-{k}", scenario.name),
        };
        tables.push(bounds_table(
            &name,
            ffz,
            tf,
            &scenario.waists,
            &scenario.levels,
            numeric,
            worker_budget(),
        )?);
    }
    emit(&tables, common.out.as_deref())
}

fn check(resolution: f64) -> Result<bool> {
    let outcomes = run_checks(resolution)?;
    let mut stdout = std::io::stdout().lock();
    for o in &outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        writeln!(stdout, "{verdict} {}: {:e} ({})", o.name, o.value, o.limit)?;
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Protocol { common, samples } => protocol(&common, samples)?,
        Command::ExpandZ { common } => expand(&common, Axis::Longitudinal)?,
        Command::ExpandR { common } => expand(&common, Axis::Radial)?,
        Command::Expand3d { common } => expand(&common, Axis::Cylindrical)?,
        Command::Figure {
            name,
            out,
            tf,
            resolution,
        } => {
            let fig = FigureName::parse(&name)
                .ok_or_else(|| Error::Usage(format!("unknown figure `{name}`")))?;
            let opts = FigureOptions {
                final_times: tf,
                resolution,
                workers: worker_budget(),
            };
            emit(&figure(fig, &opts)?, out.as_deref())?;
        }
        Command::Bounds { common, numeric } => bounds(&common, numeric)?,
        Command::Check { resolution } => return check(resolution),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
