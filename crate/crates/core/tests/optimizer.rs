mod common;

use common::oracle::oracle_choice;
use masonry_core::geometry::{place_arch_bricks, ArchConfig, ArchLayout};
use masonry_core::model::{JointSpec, DEFAULT_GRAVITY};
use masonry_core::optimizer::{check_design_criteria, gen_optimized3, Phase};
use masonry_core::sequences::{Action, FabStep, Robot, SequencePlan};

fn layout(n: usize) -> ArchLayout {
    place_arch_bricks(&ArchConfig::shallow(n)).unwrap()
}

/// Compact form of a step: action code, robot(s) and placed brick.
fn describe(s: &FabStep) -> String {
    match &s.action {
        Action::Place { brick, robot, .. } => format!("P{}:{}", robot.index() + 1, brick),
        Action::Release { robots } => {
            let r: Vec<String> = robots.iter().map(|r| (r.index() + 1).to_string()).collect();
            format!("R{}", r.join(""))
        }
        Action::Move { robot, .. } => format!("M{}", robot.index() + 1),
    }
}

fn script(plan: &SequencePlan) -> Vec<String> {
    plan.steps.iter().map(describe).collect()
}

#[test]
fn three_brick_plan_unrolled() {
    let p = gen_optimized3(&layout(3), JointSpec::default(), DEFAULT_GRAVITY).unwrap();
    assert_eq!(script(&p.plan), ["P1:1", "P2:2", "P3:3", "R123"]);
    assert_eq!(p.cycles.len(), 1);
    assert_eq!(p.cycles[0].horizon, [3, 4]);
}

#[test]
fn four_brick_plan_unrolled() {
    let p = gen_optimized3(&layout(4), JointSpec::default(), DEFAULT_GRAVITY).unwrap();
    assert_eq!(script(&p.plan), ["P1:1", "P2:2", "P3:3", "R1", "P1:4", "R123"]);
    let robots: Vec<Robot> = p.cycles.iter().map(|c| c.robot).collect();
    assert_eq!(robots, [Robot::Rob3, Robot::Rob1]);
}

#[test]
fn seven_brick_plan_unrolled() {
    let p = gen_optimized3(&layout(7), JointSpec::default(), DEFAULT_GRAVITY).unwrap();
    let expected = [
        "P1:1", "P2:2", "P3:3", "R1", "P1:4", "R2", // O1
        "M2", "R3", "P3:5", "R1", // O2
        "M1", "R2", "P2:6", "R3", // O3
        "M3", "R1", // O4
        "P1:7", "R123", // O5
    ];
    assert_eq!(script(&p.plan), expected);
    let robots: Vec<Robot> = p.cycles.iter().map(|c| c.robot).collect();
    assert_eq!(robots, [Robot::Rob3, Robot::Rob2, Robot::Rob1, Robot::Rob3, Robot::Rob1]);
    let horizons: Vec<Vec<usize>> = p.cycles.iter().map(|c| c.horizon.clone()).collect();
    assert_eq!(
        horizons,
        [vec![3, 4, 5, 6], vec![7, 8, 9, 10], vec![11, 12, 13, 14], vec![15, 16], vec![17, 18]]
    );
    // crown brick 4 goes down at step 5, inside the first horizon
    assert!(p.cycles.iter().all(|c| c.phase == Phase::PostCrown));
}

#[test]
fn step_and_cycle_counts_scale_linearly() {
    for n in 5..=9 {
        let p = gen_optimized3(&layout(n), JointSpec::default(), DEFAULT_GRAVITY).unwrap();
        assert_eq!(p.plan.steps.len(), 4 * n - 10, "n = {n}");
        assert_eq!(p.cycles.len(), n - 2, "n = {n}");
    }
}

#[test]
fn every_step_lands_in_exactly_one_horizon() {
    let p = gen_optimized3(&layout(8), JointSpec::default(), DEFAULT_GRAVITY).unwrap();
    let mut covered: Vec<usize> = p.cycles.iter().flat_map(|c| c.horizon.iter().copied()).collect();
    covered.sort_unstable();
    let expected: Vec<usize> = (3..=p.plan.steps.len()).collect();
    assert_eq!(covered, expected);
}

#[test]
fn design_criteria_hold_for_small_arches() {
    for n in 3..=9 {
        let p = gen_optimized3(&layout(n), JointSpec::default(), DEFAULT_GRAVITY).unwrap();
        check_design_criteria(&p.plan).unwrap();
        for s in p.plan.steps.iter().filter(|s| s.index > 2 && s.placed < n) {
            assert!(s.grip_count() >= 2, "n = {n}, step {}", s.index);
        }
    }
}

#[test]
fn too_few_bricks_is_an_error() {
    assert!(gen_optimized3(&layout(2), JointSpec::default(), DEFAULT_GRAVITY).is_err());
}

#[test]
fn brute_force_oracle_agrees_on_small_arches() {
    for n in 3..=6 {
        let lay = layout(n);
        let p = gen_optimized3(&lay, JointSpec::default(), DEFAULT_GRAVITY).unwrap();
        for cycle in &p.cycles {
            assert_eq!(
                cycle.chosen.node,
                oracle_choice(&lay, cycle, &p.plan),
                "n = {n}, cycle O{}",
                cycle.id
            );
        }
    }
}
