//! Crank-Nicolson stepping along `r` for `u = sqrt(r) F`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{drive, shape_r, Observer, Propagated, PropagationPlan, Scheme};
use crate::error::{Error, Result};
use crate::grid::{Axis, Wavefunction1D};
use crate::numerics::tridiag::CayleyFactor;

/// Advances `initial` in azimuthal sector `nu`. The kinetic and
/// centrifugal terms go into one Cayley factor per segment, the potential
/// is applied as an exact phase; `u` vanishes half a cell below the first
/// node.
pub fn propagate_radial(
    initial: &Wavefunction1D,
    plan: &PropagationPlan,
    nu: i32,
    observer: Option<&mut Observer<'_, Wavefunction1D>>,
) -> Result<Propagated<Wavefunction1D>> {
    plan.check_scheme(Scheme::CrankNicolsonR)?;
    let grid = *initial.grid();
    if grid.axis() != Axis::Radial {
        return Err(Error::GridMismatch);
    }
    let shape_fn = shape_r(plan.model(), plan.trajectory().geometry());
    let shape: Vec<f64> = grid.points().into_iter().map(shape_fn).collect();
    let op = grid.hamiltonian(nu, |_| 0.0);
    let factors: Vec<CayleyFactor> = plan
        .segments()
        .iter()
        .map(|seg| CayleyFactor::new(&op, Complex64::new(0.0, 0.5 * seg.dt)))
        .collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut kinetic = |segment: usize, data: &mut [Complex64]| {
        factors[segment].apply(data, &mut scratch);
    };
    let mut state = initial.clone();
    let diagnostics = drive(plan, &mut state, &shape, &mut kinetic, observer)?;
    Ok(Propagated { state, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::default_radial;
    use crate::propagate::{fidelity, PotentialModel};
    use crate::protocol::{bang_bang, invariant_quintic, static_trap, ExpansionTask};
    use crate::spectral::{radial_eigenstate, stationary_state_numeric};
    use crate::trap::{AtomSpecies, BeamGeometry, SignPolicy};
    use core::f64::consts::PI;

    fn task(waist: f64, tf_ms: f64) -> ExpansionTask {
        let geom = BeamGeometry::new(waist, 1.06e-6).unwrap();
        ExpansionTask::from_hz(2500.0, 250.0, tf_ms * 1e-3, AtomSpecies::rubidium87(), geom)
            .unwrap()
            .to_trap_units()
            .unwrap()
            .0
    }

    #[test]
    fn static_laguerre_state_is_stationary() {
        let t = task(3e-6, 1.0);
        let kappa = t.geometry().radial_ratio();
        let traj = static_trap(&t, 20.0 * PI / kappa).unwrap();
        let plan =
            PropagationPlan::new(traj, Scheme::CrankNicolsonR, PotentialModel::Harmonic, None)
                .unwrap();
        let grid = default_radial(kappa, 1.0).unwrap();
        // the discrete eigenstate, so only the time stepping is tested
        let omega_r = kappa;
        let (psi, _) =
            stationary_state_numeric(|r| 0.5 * omega_r * omega_r * r * r, &grid, 0, 0).unwrap();
        let out = propagate_radial(&psi, &plan, 0, None).unwrap();
        assert!(fidelity(&psi, &out.state).unwrap() >= 1.0 - 1e-6);
        assert!(out.diagnostics.norm_drift() < 1e-10);
        let analytic = radial_eigenstate(0, omega_r, &grid).unwrap();
        assert!(fidelity(&analytic, &out.state).unwrap() > 0.999);
    }

    #[test]
    fn bang_bang_is_poor_radially() {
        let t = task(10e-6, 1.0);
        let traj = bang_bang(&t);
        let kappa = t.geometry().radial_ratio();
        let plan =
            PropagationPlan::new(traj, Scheme::CrankNicolsonR, PotentialModel::Full, None).unwrap();
        let grid = default_radial(kappa, 10f64.sqrt()).unwrap();
        let geom = t.geometry();
        let v0 = plan.trajectory().depth(0.0);
        let (psi, _) =
            stationary_state_numeric(|r| v0 * crate::trap::radial_shape(r, &geom), &grid, 0, 0)
                .unwrap();
        let vf = plan.trajectory().depth(plan.trajectory().t_final());
        let (target, _) =
            stationary_state_numeric(|r| vf * crate::trap::radial_shape(r, &geom), &grid, 0, 0)
                .unwrap();
        let out = propagate_radial(&psi, &plan, 0, None).unwrap();
        assert!(fidelity(&target, &out.state).unwrap() < 0.9);
    }

    #[test]
    fn slow_invariant_protocol_is_radially_adiabatic() {
        let t = task(10e-6, 1.5);
        let traj = invariant_quintic(&t, SignPolicy::AttractiveOnly).unwrap();
        let kappa = t.geometry().radial_ratio();
        let plan =
            PropagationPlan::new(traj, Scheme::CrankNicolsonR, PotentialModel::Full, None).unwrap();
        let grid = default_radial(kappa, 10f64.sqrt()).unwrap();
        let geom = t.geometry();
        let v0 = plan.trajectory().depth(0.0);
        let vf = plan.trajectory().depth(plan.trajectory().t_final());
        let shape = |v: f64| move |r: f64| v * crate::trap::radial_shape(r, &geom);
        let (psi, _) = stationary_state_numeric(shape(v0), &grid, 0, 0).unwrap();
        let (target, _) = stationary_state_numeric(shape(vf), &grid, 0, 0).unwrap();
        let out = propagate_radial(&psi, &plan, 0, None).unwrap();
        assert!(fidelity(&target, &out.state).unwrap() >= 0.99);
        assert!(out.diagnostics.norm_drift() < 1e-8);
    }
}
