use masonry_core::calibration::{
    default_suite, grid_search, joint_grid, log_space, mean_abs_error, secant_stiffness, CalibrationRecord,
};
use masonry_core::geometry::{build_barrel_vault, experimental_stiffness, vault_test_specs};
use masonry_core::model::JointSpec;

fn k_m(records: &[CalibrationRecord]) -> Vec<f64> {
    records.iter().map(|r| r.k_m.expect("analysis succeeded")).collect()
}

fn with(k_linear: f64, k_rotational: f64) -> JointSpec {
    JointSpec {
        k_linear,
        k_rotational,
        ..JointSpec::default()
    }
}

#[test]
fn suite_covers_every_test() {
    let recs = default_suite(JointSpec::default()).unwrap();
    assert_eq!(recs.len(), 8);
    let ids: Vec<usize> = recs.iter().map(|r| r.test).collect();
    assert_eq!(ids, (1..=8).collect::<Vec<_>>());
    for r in &recs {
        assert!(r.error.is_none());
        assert!(r.k_e > 0.0 && r.k_m.unwrap() > 0.0);
        let e = 100.0 * (r.k_m.unwrap() - r.k_e) / r.k_e;
        assert!((e - r.e_rel.unwrap()).abs() < 1e-9);
    }
    // row 2 comes out stiffer than measured, so its error is positive
    assert!(recs[1].e_rel.unwrap() > 0.0);
}

#[test]
fn stiffness_is_independent_of_probe_load() {
    for spec in vault_test_specs() {
        let v = build_barrel_vault(&spec, JointSpec::default()).unwrap();
        let a = secant_stiffness(&v.network, v.load_node, 1.0e3).unwrap();
        let b = secant_stiffness(&v.network, v.load_node, 7.5e4).unwrap();
        assert!((a - b).abs() <= 1e-9 * a, "test {}: {a} vs {b}", spec.id);
    }
}

#[test]
fn stiffer_joints_give_stiffer_vaults() {
    let linear = [3.0e7, 1.0e8, 3.0e8, 1.0e9];
    let sweep: Vec<Vec<f64>> = linear
        .iter()
        .map(|&k| k_m(&default_suite(with(k, 0.9e6)).unwrap()))
        .collect();
    for w in sweep.windows(2) {
        for (lo, hi) in w[0].iter().zip(&w[1]) {
            assert!(hi > lo);
        }
    }
    let rotational = [1.0e4, 1.0e5, 0.9e6, 1.0e7];
    let sweep: Vec<Vec<f64>> = rotational
        .iter()
        .map(|&k| k_m(&default_suite(with(1.0e8, k)).unwrap()))
        .collect();
    for w in sweep.windows(2) {
        for (lo, hi) in w[0].iter().zip(&w[1]) {
            assert!(hi > lo);
        }
    }
}

#[test]
fn weak_rotational_springs_soften_every_test() {
    let base = k_m(&default_suite(JointSpec::default()).unwrap());
    let weak = k_m(&default_suite(with(1.0e8, 1.0e3)).unwrap());
    for (w, b) in weak.iter().zip(&base) {
        assert!(w < b);
    }
}

#[test]
fn grid_optimum_is_the_argmin_and_near_the_reference_point() {
    let grid = joint_grid(&log_space(1.0e7, 1.0e9, 5), &log_space(1.0e5, 1.0e7, 5), 1.0e4);
    let r = grid_search(&vault_test_specs(), &experimental_stiffness(), &grid).unwrap();
    assert_eq!(r.surface.len(), 25);
    for p in &r.surface {
        assert!(r.best_error <= p.mean_abs_error.unwrap() + 1e-12);
    }
    assert!((r.best.k_linear / 1.0e8).log10().abs() <= 1.0 + 1e-9);
    assert!((r.best.k_rotational / 0.9e6).log10().abs() <= 1.0 + 1e-9);
    let again = mean_abs_error(&default_suite(r.best).unwrap()).unwrap();
    assert!((again - r.best_error).abs() < 1e-9);
}
