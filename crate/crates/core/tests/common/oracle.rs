use masonry_core::geometry::ArchLayout;
use masonry_core::model::{JointSpec, SupportKind, DEFAULT_GRAVITY};
use masonry_core::optimizer::OptimizationCycle;
use masonry_core::sequences::{analyse_state, Action, GripSet, Robot, SequencePlan};

// Independent re-implementation of a cycle: enumerate the candidate nodes
// from the arch alone, rebuild the horizon from the final plan, solve every
// combination and re-rank with plain floating-point mean ranks.

fn oracle_candidates(layout: &ArchLayout, cycle: &OptimizationCycle, plan: &SequencePlan) -> Vec<(usize, usize, usize)> {
    let first = cycle.horizon[0];
    let before = &plan.steps[first - 2];
    let n = layout.n_bricks();
    let new_brick = match &plan.steps[first - 1].action {
        Action::Place { brick, robot, .. } if *robot == cycle.robot => Some(*brick),
        _ => None,
    };
    let placed = new_brick.unwrap_or(before.placed);
    let model = layout.network(placed, JointSpec::default(), 0.0).unwrap();
    let base: Vec<usize> = model
        .supports
        .iter()
        .filter(|s| s.kind == SupportKind::FixedBase)
        .map(|s| s.node)
        .collect();
    let held: Vec<usize> = before
        .grips
        .iter()
        .flatten()
        .map(|g| layout.grip_node(&model, g.brick, g.slot).unwrap())
        .collect();
    let bricks: Vec<usize> = match new_brick {
        Some(b) => vec![b],
        None => (1..=placed).collect(),
    };
    let mut all: Vec<(usize, usize, usize)> = Vec::new();
    for b in bricks {
        for slot in 0..2 {
            let node = layout.grip_node(&model, b, slot).unwrap();
            let held_elsewhere = new_brick.is_none() && held.contains(&node);
            if !held_elsewhere && !all.iter().any(|c| c.0 == node) {
                all.push((node, b, slot));
            }
        }
    }
    let mut out: Vec<_> = all.iter().copied().filter(|c| !base.contains(&c.0)).collect();
    if out.is_empty() && new_brick.is_some() {
        out = all;
    }
    assert!(placed <= n);
    out.sort_unstable();
    out
}

fn oracle_values(m: &masonry_core::solver::StepMetrics, post: bool, robot: Robot) -> Vec<f64> {
    if post {
        vec![m.t_max, m.m_sup, m.f_rob[robot.index()].abs(), m.delta_max]
    } else {
        vec![m.t_max, m.m_sup, m.f_rob[0].abs(), m.f_rob[1].abs(), m.f_rob[2].abs()]
    }
}

fn mean_ranks(col: &[Option<f64>]) -> Vec<f64> {
    let n = col.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let Some(v) = col[i] else {
            out[i] = n as f64;
            continue;
        };
        let mut below = 0usize;
        let mut equal = 0usize;
        for other in col.iter().flatten() {
            if *other < v {
                below += 1;
            } else if *other == v {
                equal += 1;
            }
        }
        out[i] = below as f64 + (equal as f64 + 1.0) / 2.0;
    }
    out
}

pub fn oracle_choice(layout: &ArchLayout, cycle: &OptimizationCycle, plan: &SequencePlan) -> usize {
    let cands = oracle_candidates(layout, cycle, plan);
    let got: Vec<usize> = {
        let mut v: Vec<usize> = cycle.candidates.iter().map(|c| c.node).collect();
        v.sort_unstable();
        v
    };
    let want: Vec<usize> = cands.iter().map(|c| c.0).collect();
    assert_eq!(got, want, "candidate set of cycle {}", cycle.id);

    let crown_brick = layout.n_bricks().div_ceil(2);
    let crown_step = plan.steps.iter().find(|s| s.placed == crown_brick).unwrap().index;
    let post = cycle.horizon.iter().any(|&s| s > crown_step);
    let chosen_grip = plan.steps[cycle.horizon[0] - 1].grips[cycle.robot.index()];

    let mut objective = vec![0.0; cands.len()];
    for &step in &cycle.horizon {
        let s = &plan.steps[step - 1];
        let values: Vec<Option<Vec<f64>>> = cands
            .iter()
            .map(|&(_, brick, slot)| {
                let mut grips: GripSet = s.grips;
                if grips[cycle.robot.index()] == chosen_grip {
                    grips[cycle.robot.index()] = Some(masonry_core::sequences::GripPoint { brick, slot });
                }
                analyse_state(layout, s.placed, &grips, JointSpec::default(), DEFAULT_GRAVITY)
                    .ok()
                    .map(|(m, _)| oracle_values(&m, post, cycle.robot))
            })
            .collect();
        let k = if post { 4 } else { 5 };
        let mut sum = vec![0.0; cands.len()];
        for c in 0..k {
            let col: Vec<Option<f64>> = values.iter().map(|v| v.as_ref().map(|v| v[c])).collect();
            for (acc, r) in sum.iter_mut().zip(mean_ranks(&col)) {
                *acc += r;
            }
        }
        for (o, s) in objective.iter_mut().zip(sum) {
            *o += s / k as f64;
        }
    }
    let best = objective.iter().cloned().fold(f64::INFINITY, f64::min);
    cands
        .iter()
        .zip(&objective)
        .filter(|(_, o)| **o <= best + 1e-9)
        .map(|(c, _)| c.0)
        .min()
        .unwrap()
}
