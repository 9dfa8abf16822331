//! Coupled `(r, z)` stepping in one azimuthal sector, and the 2D ground
//! state by imaginary-time relaxation.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

use super::{
    drive, shape_r, shape_rz, shape_z, Observer, PotentialModel, Propagated, PropagationPlan,
    Scheme,
};
use crate::error::{positive, Error, Result};
use crate::grid::{Grid2D, Wavefunction2D};
use crate::numerics::tridiag::{CayleyFactor, SymTridiagonal};
use crate::spectral::stationary_state_numeric;
use crate::trap::BeamGeometry;

/// Applies a Cayley factor along `z` to every radial column at once.
/// `data` is laid out `[iz][ir]`.
fn apply_columns(f: &CayleyFactor, data: &mut [Complex64], nr: usize, scratch: &mut [Complex64]) {
    let nz = f.len();
    // solve (1 + cT) x = psi column-wise into scratch, then psi = 2x - psi
    let p0 = f.inv_pivot[0];
    for (x, y) in scratch[..nr].iter_mut().zip(&data[..nr]) {
        *x = y * p0;
    }
    for iz in 1..nz {
        let l = f.lower_scaled[iz];
        let p = f.inv_pivot[iz];
        let (done, rest) = scratch.split_at_mut(iz * nr);
        let prev = &done[(iz - 1) * nr..];
        let src = &data[iz * nr..(iz + 1) * nr];
        for ((x, y), s) in rest[..nr].iter_mut().zip(prev).zip(src) {
            *x = s * p - l * y;
        }
    }
    for iz in (0..nz - 1).rev() {
        let u = f.upper[iz];
        let (head, tail) = scratch.split_at_mut((iz + 1) * nr);
        let next = &tail[..nr];
        for (x, y) in head[iz * nr..].iter_mut().zip(next) {
            *x -= u * y;
        }
    }
    for (p, x) in data.iter_mut().zip(scratch.iter()) {
        *p = 2.0 * x - *p;
    }
}

/// Applies a Cayley factor along `r` to every row, a block of rows at a
/// time so the recurrences of neighbouring rows overlap.
fn apply_rows(f: &CayleyFactor, data: &mut [Complex64], nr: usize, scratch: &mut [Complex64]) {
    const BLOCK: usize = 8;
    for (rows, work) in data
        .chunks_mut(BLOCK * nr)
        .zip(scratch.chunks_mut(BLOCK * nr))
    {
        let lines = rows.len() / nr;
        for j in 0..lines {
            work[j * nr] = rows[j * nr] * f.inv_pivot[0];
        }
        for i in 1..nr {
            let (l, p) = (f.lower_scaled[i], f.inv_pivot[i]);
            for j in 0..lines {
                let k = j * nr + i;
                work[k] = rows[k] * p - l * work[k - 1];
            }
        }
        for i in (0..nr - 1).rev() {
            let u = f.upper[i];
            for j in 0..lines {
                let k = j * nr + i;
                work[k] -= u * work[k + 1];
            }
        }
        for (p, x) in rows.iter_mut().zip(work.iter()) {
            *p = 2.0 * x - *p;
        }
    }
}

/// Both Cayley factors for one step length.
struct SplitFactors {
    r: CayleyFactor,
    z: CayleyFactor,
}

impl SplitFactors {
    fn new(op_r: &SymTridiagonal, op_z: &SymTridiagonal, coeff: Complex64) -> Self {
        Self {
            r: CayleyFactor::new(op_r, coeff),
            z: CayleyFactor::new(op_z, coeff),
        }
    }

    fn apply(&self, data: &mut [Complex64], nr: usize, scratch: &mut [Complex64]) {
        apply_rows(&self.r, data, nr, scratch);
        apply_columns(&self.z, data, nr, scratch);
    }
}

fn sample_shape(grid: &Grid2D, model: PotentialModel, geometry: &BeamGeometry) -> Vec<f64> {
    let f = shape_rz(model, geometry);
    let r = grid.r.points();
    let mut out = Vec::with_capacity(grid.len());
    for z in grid.z.points() {
        out.extend(r.iter().map(|&r| f(r, z)));
    }
    out
}

/// Advances `initial` in azimuthal sector `nu` with
/// `exp(-i V dt/2) CN_r CN_z exp(-i V dt/2)`: the full coupled potential
/// as an exact phase and one Crank-Nicolson sweep per axis.
pub fn propagate_3d(
    initial: &Wavefunction2D,
    plan: &PropagationPlan,
    nu: i32,
    observer: Option<&mut Observer<'_, Wavefunction2D>>,
) -> Result<Propagated<Wavefunction2D>> {
    plan.check_scheme(Scheme::Adi2D)?;
    let grid = *initial.grid();
    let shape = sample_shape(&grid, plan.model(), plan.trajectory().geometry());
    let op_r = grid.r.hamiltonian(nu, |_| 0.0);
    let op_z = grid.z.kinetic();
    let factors: Vec<SplitFactors> = plan
        .segments()
        .iter()
        .map(|seg| SplitFactors::new(&op_r, &op_z, Complex64::new(0.0, 0.5 * seg.dt)))
        .collect();
    let nr = grid.r.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut kinetic = |segment: usize, data: &mut [Complex64]| {
        factors[segment].apply(data, nr, &mut scratch);
    };
    let mut state = initial.clone();
    let diagnostics = drive(plan, &mut state, &shape, &mut kinetic, observer)?;
    Ok(Propagated { state, diagnostics })
}

/// Settings for [`ground_state_2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateOptions {
    /// Imaginary time step; default `0.02 / omega_R` of the trap.
    pub dtau: Option<f64>,
    /// Stop once the energy changes by less than this per step.
    pub tolerance: f64,
    pub check_every: usize,
    pub max_steps: usize,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            dtau: None,
            tolerance: 1e-10,
            check_every: 10,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState2D {
    pub state: Wavefunction2D,
    pub energy: f64,
    pub steps: usize,
}

/// `<psi|H|psi>` with `H = T_r + centrifugal + T_z + depth shape`.
fn energy(
    data: &[Complex64],
    grid: &Grid2D,
    op_r: &SymTridiagonal,
    op_z: &SymTridiagonal,
    potential: &[f64],
) -> f64 {
    let nr = grid.r.len();
    let nz = grid.z.len();
    let mut out = vec![Complex64::new(0.0, 0.0); nr];
    let mut total = 0.0;
    for (iz, row) in data.chunks_exact(nr).enumerate() {
        op_r.apply(row, &mut out);
        for ir in 0..nr {
            let mut hz = op_z.diag[iz] * row[ir];
            if iz > 0 {
                hz += op_z.off[iz - 1] * data[(iz - 1) * nr + ir];
            }
            if iz + 1 < nz {
                hz += op_z.off[iz] * data[(iz + 1) * nr + ir];
            }
            let h = out[ir] + hz + potential[iz * nr + ir] * row[ir];
            total += (row[ir].conj() * h).re;
        }
    }
    total * grid.cell()
}

/// Ground state of the trap with depth `depth` in sector `nu`: seeded by
/// the product of the two 1D numeric ground states and relaxed with
/// `exp(-V dtau/2) C_r C_z exp(-V dtau/2)`, `C` the real Cayley factors,
/// renormalizing every step.
pub fn ground_state_2d(
    grid: &Grid2D,
    depth: f64,
    geometry: &BeamGeometry,
    model: PotentialModel,
    nu: i32,
    options: GroundStateOptions,
) -> Result<GroundState2D> {
    let depth = positive("trap depth", depth)?;
    let fr = shape_r(model, geometry);
    let fz = shape_z(model, geometry);
    let (seed_r, _) = stationary_state_numeric(|r| depth * fr(r), &grid.r, nu, 0)?;
    let (seed_z, _) = stationary_state_numeric(|z| depth * fz(z), &grid.z, 0, 0)?;
    let mut state = Wavefunction2D::product(&seed_r, &seed_z)?;
    state.normalize()?;

    let omega_r = 2.0 * depth.sqrt() / geometry.waist();
    let dtau = match options.dtau {
        Some(d) => positive("imaginary time step", d)?,
        None => 0.02 / omega_r,
    };
    let shape = sample_shape(grid, model, geometry);
    let potential: Vec<f64> = shape.iter().map(|s| depth * s).collect();
    let half: Vec<f64> = potential.iter().map(|v| (-0.5 * v * dtau).exp()).collect();
    let op_r = grid.r.hamiltonian(nu, |_| 0.0);
    let op_z = grid.z.kinetic();
    let factors = SplitFactors::new(&op_r, &op_z, Complex64::new(0.5 * dtau, 0.0));
    let nr = grid.r.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.len()];

    let every = options.check_every.max(1);
    let mut last = energy(state.data(), grid, &op_r, &op_z, &potential);
    let mut steps = 0;
    while steps < options.max_steps {
        for _ in 0..every {
            let data = state.data_mut();
            data.iter_mut().zip(&half).for_each(|(x, h)| *x *= h);
            factors.apply(data, nr, &mut scratch);
            data.iter_mut().zip(&half).for_each(|(x, h)| *x *= h);
            state.normalize()?;
        }
        steps += every;
        let e = energy(state.data(), grid, &op_r, &op_z, &potential);
        let change = (e - last).abs() / every as f64;
        last = e;
        if change < options.tolerance {
            return Ok(GroundState2D {
                state,
                energy: e,
                steps,
            });
        }
    }
    Err(Error::NotConverged {
        what: "imaginary-time relaxation",
        iterations: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::propagate::{
        fidelity, propagate_longitudinal, propagate_radial, LongitudinalKinetic,
    };
    use crate::protocol::{invariant_quintic, static_trap, ExpansionTask};
    use crate::spectral::{harmonic_eigenstate_z, radial_eigenstate};
    use crate::trap::{AtomSpecies, SignPolicy};
    use core::f64::consts::PI;

    fn task(tf_ms: f64) -> ExpansionTask {
        let geom = BeamGeometry::new(10e-6, 1.06e-6).unwrap();
        ExpansionTask::from_hz(2500.0, 250.0, tf_ms * 1e-3, AtomSpecies::rubidium87(), geom)
            .unwrap()
            .to_trap_units()
            .unwrap()
            .0
    }

    fn small_grid(kappa: f64, b_max: f64) -> Grid2D {
        let width = 1.0 / kappa.sqrt();
        let r = Grid1D::radial(128, 8.0 * width * b_max).unwrap();
        let z = Grid1D::longitudinal(256, 8.0 * b_max).unwrap();
        Grid2D::new(r, z).unwrap()
    }

    #[test]
    fn row_sweep_matches_per_row_solve() {
        let op = Grid1D::radial(16, 3.0).unwrap().hamiltonian(1, |_| 0.0);
        let f = CayleyFactor::new(&op, Complex64::new(0.0, 0.01));
        let nr = 16;
        let data: Vec<Complex64> = (0..nr * 11)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut batched = data.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
        apply_rows(&f, &mut batched, nr, &mut scratch);
        for (row, out) in data.chunks(nr).zip(batched.chunks(nr)) {
            let mut row = row.to_vec();
            let mut s = vec![Complex64::new(0.0, 0.0); nr];
            f.apply(&mut row, &mut s);
            for (a, b) in row.iter().zip(out) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn column_sweep_matches_per_column_solve() {
        let op = Grid1D::longitudinal(16, 3.0).unwrap().kinetic();
        let f = CayleyFactor::new(&op, Complex64::new(0.0, 0.01));
        let nr = 3;
        let data: Vec<Complex64> = (0..16 * nr)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut batched = data.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
        apply_columns(&f, &mut batched, nr, &mut scratch);
        for ir in 0..nr {
            let mut col: Vec<Complex64> = (0..16).map(|iz| data[iz * nr + ir]).collect();
            let mut s = vec![Complex64::new(0.0, 0.0); 16];
            f.apply(&mut col, &mut s);
            for iz in 0..16 {
                assert!((col[iz] - batched[iz * nr + ir]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn static_product_state_is_stationary() {
        let t = task(1.0);
        let kappa = t.geometry().radial_ratio();
        let traj = static_trap(&t, 10.0 * PI).unwrap();
        let plan =
            PropagationPlan::new(traj, Scheme::Adi2D, PotentialModel::Harmonic, None).unwrap();
        let grid = small_grid(kappa, 1.0);
        let start = ground_state_2d(
            &grid,
            plan.trajectory().depth(0.0),
            &t.geometry(),
            PotentialModel::Harmonic,
            0,
            GroundStateOptions::default(),
        )
        .unwrap();
        let out = propagate_3d(&start.state, &plan, 0, None).unwrap();
        assert!(fidelity(&start.state, &out.state).unwrap() >= 1.0 - 1e-5);
        assert!(out.diagnostics.norm_drift() < 1e-7);
    }

    #[test]
    fn separable_case_factorizes() {
        let t = task(1.0);
        let kappa = t.geometry().radial_ratio();
        let traj = invariant_quintic(&t, SignPolicy::AttractiveOnly).unwrap();
        let grid = small_grid(kappa, 10f64.sqrt());
        let dt = PropagationPlan::max_step(&traj, Scheme::Adi2D) / 4.0;
        let model = PotentialModel::Harmonic;
        let plan_2d = PropagationPlan::new(traj.clone(), Scheme::Adi2D, model, Some(dt)).unwrap();
        let plan_r =
            PropagationPlan::new(traj.clone(), Scheme::CrankNicolsonR, model, Some(dt)).unwrap();
        let plan_z = PropagationPlan::new(traj, Scheme::SplitOperatorZ, model, Some(dt))
            .unwrap()
            .with_longitudinal_kinetic(LongitudinalKinetic::FiniteDifference);

        let psi_r = radial_eigenstate(0, kappa, &grid.r).unwrap();
        let psi_z = harmonic_eigenstate_z(0, 1.0, &grid.z).unwrap();
        let tgt_r = radial_eigenstate(0, kappa * t.omegaf(), &grid.r).unwrap();
        let tgt_z = harmonic_eigenstate_z(0, t.omegaf(), &grid.z).unwrap();
        let psi = Wavefunction2D::product(&psi_r, &psi_z).unwrap();
        let target = Wavefunction2D::product(&tgt_r, &tgt_z).unwrap();

        let f3 = fidelity(
            &target,
            &propagate_3d(&psi, &plan_2d, 0, None).unwrap().state,
        )
        .unwrap();
        let fr = fidelity(
            &tgt_r,
            &propagate_radial(&psi_r, &plan_r, 0, None).unwrap().state,
        )
        .unwrap();
        let fl = fidelity(
            &tgt_z,
            &propagate_longitudinal(&psi_z, &plan_z, None).unwrap().state,
        )
        .unwrap();
        assert!((f3 - fr * fl).abs() <= 1e-10, "{f3} {fr} {fl}");
    }

    #[test]
    fn ground_state_is_near_product_of_1d_states() {
        let t = task(1.0);
        let kappa = t.geometry().radial_ratio();
        let grid = small_grid(kappa, 1.0);
        let depth = 0.5 * t.geometry().rayleigh_range().powi(2);
        let g = ground_state_2d(
            &grid,
            depth,
            &t.geometry(),
            PotentialModel::Full,
            0,
            GroundStateOptions::default(),
        )
        .unwrap();
        let r = radial_eigenstate(0, kappa, &grid.r).unwrap();
        let z = harmonic_eigenstate_z(0, 1.0, &grid.z).unwrap();
        let product = Wavefunction2D::product(&r, &z).unwrap();
        assert!(fidelity(&product, &g.state).unwrap() > 0.999);
        // zero-point energy (kappa + 1/2) less the anharmonic shifts
        assert!((g.energy - (kappa + 0.5)).abs() < 0.05 * kappa);
    }
}
