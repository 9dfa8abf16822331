use beamexpand::figures::{figure, standard_task, FigureName, FigureOptions};
use beamexpand::scenario::{run_point, run_scenario, Axis, Scenario};
use beamexpand_core::protocol::ProtocolKind;

#[test]
fn single_point_sweep_equals_direct_run() {
    let task = standard_task(250.0, 1e-3, 3e-6).unwrap();
    let s = Scenario::new("one", task, ProtocolKind::Invariant, Axis::Radial);
    let run = run_scenario(&s, 4).unwrap();
    let point = s.points()[0];
    let direct = run_point(&s, &point).unwrap();
    assert_eq!(run.outcomes[0].result(), Some(&direct));
}

#[test]
fn figure_tables_are_reproducible() {
    let opts = |workers| FigureOptions {
        final_times: Some(vec![0.3e-3, 1e-3]),
        resolution: 1.0,
        workers,
    };
    let a = figure(FigureName::Fig4, &opts(1)).unwrap();
    let b = figure(FigureName::Fig4, &opts(2)).unwrap();
    assert_eq!(a[0].to_csv(), b[0].to_csv());
    let csv = a[0].to_csv();
    // 0.3 ms is below the attractivity threshold
    assert!(csv.contains("excluded: "));
    assert!(csv.contains("# min_attractive_tf_s: "));
    let estimates = a[0].numbers("adiabatic_estimate").len();
    assert!(estimates > 0 && estimates < a[0].rows.len());
}

#[test]
fn fig5_has_three_radial_curves() {
    let t = &figure(FigureName::Fig5, &FigureOptions::default()).unwrap()[0];
    assert_eq!(t.rows.len(), 361);
    for name in [
        "omega_r_sq_actual",
        "omega_r_sq_ideal",
        "omega_r_sq_fast_adiabatic",
    ] {
        assert_eq!(t.numbers(name).len(), 361);
    }
    // wherever b'' > 0 the actual curve lies below the ideal one
    let actual = t.numbers("omega_r_sq_actual");
    let ideal = t.numbers("omega_r_sq_ideal");
    assert!(actual.iter().zip(&ideal).any(|(a, i)| a < i));
}
