use beamexpand_core::grid::{default_longitudinal, Grid1D, Wavefunction1D};
use beamexpand_core::propagate::{
    propagate_longitudinal, Observer, PotentialModel, PropagationPlan, Scheme,
};
use beamexpand_core::protocol::{invariant_quintic, ExpansionTask};
use beamexpand_core::spectral::{
    expanding_mode, harmonic_eigenstate_z, harmonic_potential, invariant_expectation,
    radial_eigenstate, radial_expanding_mode, stationary_state_numeric, ExpandingModeSpec,
};
use beamexpand_core::trap::{AtomSpecies, BeamGeometry, SignPolicy};
use num_complex::Complex64;
use proptest::prelude::*;

fn zgrid() -> Grid1D {
    Grid1D::longitudinal(1024, 30.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constructors_are_normalized(
        n in 0usize..6,
        omega in 0.5..4.0f64,
        b in 0.6..3.0f64,
        db in -1.0..1.0f64,
    ) {
        let z = zgrid();
        let r = Grid1D::radial(800, 12.0).unwrap();
        let spec = ExpandingModeSpec { level: n, omega0: omega, b, db, phase_integral: 0.3 };
        let states = [
            harmonic_eigenstate_z(n, omega, &z).unwrap(),
            expanding_mode(&spec, &z).unwrap(),
            stationary_state_numeric(harmonic_potential(omega), &z, 0, n).unwrap().0,
            radial_eigenstate(n, omega, &r).unwrap(),
            radial_expanding_mode(omega, b, db, &r).unwrap(),
        ];
        for s in &states {
            prop_assert!((s.norm() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn expanding_modes_are_orthonormal(b in 0.5..3.0f64, db in -2.0..2.0f64, omega in 0.5..2.0f64) {
        let z = zgrid();
        let modes: Vec<Wavefunction1D> = (0..5)
            .map(|n| {
                let spec = ExpandingModeSpec { level: n, omega0: omega, b, db, phase_integral: 0.0 };
                expanding_mode(&spec, &z).unwrap()
            })
            .collect();
        for (i, a) in modes.iter().enumerate() {
            for (j, c) in modes.iter().enumerate() {
                let g = a.overlap(c).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g - Complex64::new(expect, 0.0)).norm() <= 1e-6);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    /// Arbitrary superpositions keep `<I>` along exact harmonic evolution.
    #[test]
    fn invariant_is_conserved_for_superpositions(
        c in proptest::collection::vec(-1.0..1.0f64, 3),
        t_f in 0.8e-3..2e-3f64,
    ) {
        prop_assume!(c.iter().map(|x| x * x).sum::<f64>() > 0.1);
        let geometry = BeamGeometry::new(3e-6, 1.06e-6).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let si = ExpansionTask::new(two_pi * 2500.0, two_pi * 250.0, t_f, AtomSpecies::rubidium87(), geometry)
            .unwrap();
        let (task, _) = si.to_trap_units().unwrap();
        let traj = invariant_quintic(&task, SignPolicy::AllowRepulsive).unwrap();
        let scaling = traj.scaling().unwrap().clone();
        let grid = default_longitudinal(2, task.gamma(), 1.0).unwrap();
        let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (n, &cn) in c.iter().enumerate() {
            let phi = harmonic_eigenstate_z(n, 1.0, &grid).unwrap();
            for (d, p) in data.iter_mut().zip(phi.data()) {
                *d += cn * p;
            }
        }
        let psi = Wavefunction1D::new(grid, data).unwrap().normalized().unwrap();
        let initial = invariant_expectation(&psi, 1.0, 0.0, 1.0).unwrap();
        // Excited components carry a larger splitting error; a quarter of the default step keeps
        // it well below the tolerance.
        let dt = PropagationPlan::max_step(&traj, Scheme::SplitOperatorZ) / 16.0;
        let plan = PropagationPlan::new(traj, Scheme::SplitOperatorZ, PotentialModel::Harmonic, Some(dt))
            .unwrap();
        let every = plan.step_count() / 10;
        let mut worst: f64 = 0.0;
        let mut record = |t: f64, state: &Wavefunction1D| {
            let s = scaling.at(t);
            let v = invariant_expectation(state, s.b, s.db, 1.0).unwrap();
            worst = worst.max((v - initial).abs() / initial);
        };
        let mut observer = Observer { every, callback: &mut record };
        propagate_longitudinal(&psi, &plan, Some(&mut observer)).unwrap();
        prop_assert!(worst <= 1e-4, "{}", worst);
    }
}
