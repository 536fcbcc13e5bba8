use std::sync::OnceLock;

use masonry_core::geometry::{place_arch_bricks, ArchConfig, ArchLayout};
use masonry_core::model::{JointSpec, DEFAULT_GRAVITY};
use masonry_core::sequences::{
    critical_steps, gen_cantilever, gen_sequential, shared_steps, simulate_plan, write_steps_csv, Method,
    SequenceReport, STEP_COLUMNS,
};

fn layout() -> &'static ArchLayout {
    static L: OnceLock<ArchLayout> = OnceLock::new();
    L.get_or_init(|| place_arch_bricks(&ArchConfig::default()).unwrap())
}

fn sequential() -> &'static SequenceReport {
    static R: OnceLock<SequenceReport> = OnceLock::new();
    R.get_or_init(|| simulate_plan(&gen_sequential(25), layout(), JointSpec::default(), DEFAULT_GRAVITY).unwrap())
}

fn cantilever() -> &'static SequenceReport {
    static R: OnceLock<SequenceReport> = OnceLock::new();
    R.get_or_init(|| simulate_plan(&gen_cantilever(25), layout(), JointSpec::default(), DEFAULT_GRAVITY).unwrap())
}

const POST_CROWN_CRITICAL: [usize; 4] = [33, 35, 45, 47];

#[test]
fn both_two_robot_plans_have_49_steps() {
    assert_eq!(gen_sequential(25).steps.len(), 49);
    assert_eq!(gen_cantilever(25).steps.len(), 49);
}

#[test]
fn shared_steps_are_every_sixth_pair() {
    let shared = shared_steps(&gen_sequential(25), &gen_cantilever(25));
    assert_eq!(shared, [1, 2, 7, 8, 13, 14, 19, 20, 25, 26, 31, 32, 37, 38, 43, 44, 49]);
}

#[test]
fn critical_steps_of_full_arch() {
    let c = critical_steps(&gen_sequential(25), layout()).unwrap();
    assert_eq!(c, [9, 11, 21, 23, 33, 35, 45, 47]);
    assert!(critical_steps(&gen_cantilever(25), layout()).unwrap().is_empty());
}

#[test]
fn twist_multiples_separate_critical_steps() {
    let r = sequential();
    for (i, row) in r.rows.iter().enumerate() {
        if POST_CROWN_CRITICAL.contains(&row.step) {
            assert!(r.c2[i] > 5.0, "step {}: C2 = {}", row.step, r.c2[i]);
        } else if !r.critical.contains(&row.step) {
            assert!(r.c2[i] < 3.0, "step {}: C2 = {}", row.step, r.c2[i]);
        }
    }
}

#[test]
fn crown_splits_the_sequence() {
    assert_eq!(sequential().crown_step, 24);
    let plan = gen_cantilever(25);
    let step = plan.steps.iter().find(|s| s.placed == 13).unwrap().index;
    assert_eq!(cantilever().crown_step, step);
}

#[test]
fn cantilever_halves_twist_at_critical_steps() {
    for s in POST_CROWN_CRITICAL {
        let a = &sequential().row(s).unwrap().metrics;
        let b = &cantilever().row(s).unwrap().metrics;
        assert!(b.m_sup <= 0.5 * a.m_sup, "step {s}: M_sup {} vs {}", b.m_sup, a.m_sup);
        assert!(b.delta_max <= 0.5 * a.delta_max, "step {s}: Δ {} vs {}", b.delta_max, a.delta_max);
    }
}

#[test]
fn cantilever_trades_twist_for_tension() {
    let (s, c) = (&sequential().tension, &cantilever().tension);
    assert!(c.avg_full > s.avg_full);
    assert!(c.avg_before_crown > s.avg_before_crown);
    assert!(c.avg_after_crown > s.avg_after_crown);
    assert!((c.max - s.max).abs() <= 0.15 * s.max.max(c.max));
}

#[test]
fn closed_arch_rests_on_its_springings() {
    let last = &sequential().row(49).unwrap().metrics;
    let weight = layout().total_weight(DEFAULT_GRAVITY);
    assert!(last.f_rob.iter().all(|f| *f == 0.0));
    assert!((last.f_sup - 472.3).abs() <= 0.1 * 472.3, "F_sup = {}", last.f_sup);
    assert!(last.f_sup < weight);
}

#[test]
fn first_brick_hangs_mostly_on_the_robot() {
    let m = &sequential().row(1).unwrap().metrics;
    let weight = layout().total_weight(DEFAULT_GRAVITY) / 25.0;
    assert!(m.f_rob[0] > m.f_sup);
    assert!((m.f_rob[0] + m.f_sup - weight).abs() < 1e-6 * weight);
}

#[test]
fn tension_share_after_first_critical_release() {
    let t = sequential().row(9).unwrap().metrics.t_pct;
    assert!((t - 43.8).abs() < 5.0, "T% = {t}");
}

#[test]
fn every_step_is_in_equilibrium() {
    for r in [sequential(), cantilever()] {
        assert!(r.max_imbalance() < 1e-6, "{:?}: {}", r.method, r.max_imbalance());
    }
}

#[test]
fn csv_has_header_and_one_row_per_step() {
    let mut buf = Vec::new();
    write_steps_csv(&mut buf, sequential(), "method = sequential").unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# method = sequential");
    assert_eq!(lines.next().unwrap(), STEP_COLUMNS.join(","));
    assert_eq!(lines.count(), 49);
}

#[test]
fn reports_are_deterministic() {
    let again = simulate_plan(&gen_sequential(25), layout(), JointSpec::default(), DEFAULT_GRAVITY).unwrap();
    let a = serde_json::to_string(sequential()).unwrap();
    let b = serde_json::to_string(&again).unwrap();
    assert_eq!(a, b);
    assert_eq!(again.method, Method::Sequential);
}
