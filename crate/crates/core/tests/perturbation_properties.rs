use beamexpand_core::perturbation::{
    alpha_coefficient, f1_diagonal, fidelity_first_order_bound, scaling_action_integral,
    second_order_fidelity, ActionKind, PerturbationContext,
};
use beamexpand_core::protocol::ExpansionTask;
use beamexpand_core::trap::{AtomSpecies, BeamGeometry};
use proptest::prelude::*;

fn task(ffz: f64, t_f: f64, waist: f64) -> ExpansionTask {
    let geometry = BeamGeometry::new(waist, 1.06e-6).unwrap();
    ExpansionTask::from_hz(2500.0, ffz, t_f, AtomSpecies::rubidium87(), geometry).unwrap()
}

proptest! {
    #[test]
    fn alpha_selection_rule(n in 0usize..30, m in 0usize..30) {
        let d = n.abs_diff(m);
        if d % 2 == 1 || d > 4 {
            prop_assert_eq!(alpha_coefficient(n, m), 0.0);
        } else {
            prop_assert!(alpha_coefficient(n, m) > 0.0);
        }
    }

    #[test]
    fn optimal_action_is_minimal(gamma in 1.01..20.0f64, t_f in 0.1..10.0f64) {
        let opt = scaling_action_integral(ActionKind::Optimal, gamma, t_f);
        let quintic = scaling_action_integral(ActionKind::Quintic, gamma, t_f);
        prop_assert!(opt <= quintic);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagonal_term_is_a_phase(
        ffz in 20.0..500.0f64,
        t_f in 0.5e-3..4e-3f64,
        waist in 2e-6..2e-5f64,
        n in 0usize..6,
    ) {
        let ctx = PerturbationContext::quintic(&task(ffz, t_f, waist), n).unwrap();
        let f1 = f1_diagonal(&ctx).unwrap();
        prop_assert!(f1.re.abs() <= 1e-10 * f1.im.abs());
    }

    #[test]
    fn first_order_defect_is_below_second_order(
        ffz in 20.0..500.0f64,
        t_f in 0.5e-3..4e-3f64,
        waist in 2e-6..2e-5f64,
        n in 0usize..6,
    ) {
        let ctx = PerturbationContext::quintic(&task(ffz, t_f, waist), n).unwrap();
        let f1 = f1_diagonal(&ctx).unwrap().norm();
        prop_assume!(f1 <= 0.05);
        let second = second_order_fidelity(&ctx).unwrap();
        prop_assert!(1.0 - f1 <= second + 5e-3, "|f1| {} second {}", f1, second);
    }

    #[test]
    fn bound_falls_with_level_and_rises_with_waist(
        ffz in 20.0..500.0f64,
        t_f in 0.5e-3..4e-3f64,
        waist in 2e-6..1e-5f64,
        n in 0usize..8,
    ) {
        let bound = |w: f64, n: usize| {
            let ctx = PerturbationContext::quintic(&task(ffz, t_f, w), n).unwrap();
            fidelity_first_order_bound(&ctx).unwrap().bound
        };
        let here = bound(waist, n);
        prop_assert!(bound(waist, n + 1) <= here);
        prop_assert!(bound(1.5 * waist, n) >= here);
    }
}
