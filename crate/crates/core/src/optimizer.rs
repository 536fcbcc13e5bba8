//! Rank-based placement of a third robotic support.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArchLayout;
use crate::model::{JointSpec, SupportKind};
use crate::sequences::{
    analyse_state, critical_steps, gen_sequential, Action, GripPoint, GripSet, Method, PlanBuilder,
    Robot, SequencePlan,
};
use crate::solver::StepMetrics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    PreCrown,
    PostCrown,
}

impl Phase {
    pub fn criteria_count(self) -> usize {
        match self {
            Phase::PreCrown => 5,
            Phase::PostCrown => 4,
        }
    }
}

/// Criterion values of one step, lower is better.
pub fn criteria(m: &StepMetrics, phase: Phase, active: Robot) -> Vec<f64> {
    match phase {
        Phase::PreCrown => vec![m.t_max, m.m_sup, m.f_rob[0].abs(), m.f_rob[1].abs(), m.f_rob[2].abs()],
        Phase::PostCrown => vec![m.t_max, m.m_sup, m.f_rob[active.index()].abs(), m.delta_max],
    }
}

/// Raw per-step criterion values of one candidate; `None` marks a singular step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateValues {
    pub node: usize,
    pub steps: Vec<Option<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvaluation {
    pub node: usize,
    pub values: Vec<Option<Vec<f64>>>,
    /// Per step, per criterion rank (1 = best, ties share the mean).
    pub ranks: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
    pub objective: f64,
    /// Objective × 2 × criteria count, exact for tie comparison.
    #[serde(skip)]
    score: u64,
}

/// Twice the mean rank of each value (ties share the mean), as integers.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0u64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share rank ((i+1) + (j+1)) / 2
        let doubled = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            out[k] = doubled;
        }
        i = j + 1;
    }
    out
}

/// Ranks candidates by the summed mean rank over the horizon.
///
/// Singular steps take rank = number of candidates on every criterion. The
/// result is sorted best first, ties going to the lowest node id.
pub fn rank_objective(evals: &[CandidateValues], phase: Phase) -> Result<Vec<CandidateEvaluation>> {
    if evals.is_empty() {
        return Err(Error::Optimization("no candidates to rank".into()));
    }
    let horizon = evals[0].steps.len();
    let nc = phase.criteria_count();
    for e in evals {
        if e.steps.len() != horizon {
            return Err(Error::Optimization(format!(
                "candidate {} evaluated on {} of {horizon} steps",
                e.node,
                e.steps.len()
            )));
        }
        for v in e.steps.iter().flatten() {
            if v.len() != nc {
                return Err(Error::Optimization(format!(
                    "candidate {} has {} criteria, expected {nc}",
                    e.node,
                    v.len()
                )));
            }
        }
    }
    let n = evals.len();
    let worst = 2 * n as u64;
    let mut doubled = vec![vec![vec![0u64; nc]; horizon]; n];
    for step in 0..horizon {
        let solved: Vec<usize> = (0..n).filter(|&c| evals[c].steps[step].is_some()).collect();
        for c in 0..n {
            if evals[c].steps[step].is_none() {
                doubled[c][step] = vec![worst; nc];
            }
        }
        for k in 0..nc {
            let vals: Vec<f64> = solved
                .iter()
                .map(|&c| evals[c].steps[step].as_ref().map(|v| v[k]).unwrap_or(f64::NAN))
                .collect();
            for (r, &c) in doubled_ranks(&vals).into_iter().zip(&solved) {
                doubled[c][step][k] = r;
            }
        }
    }
    let denom = (2 * nc) as f64;
    let mut out: Vec<CandidateEvaluation> = evals
        .iter()
        .zip(doubled)
        .map(|(e, d)| {
            let step_sums: Vec<u64> = d.iter().map(|s| s.iter().sum()).collect();
            let score: u64 = step_sums.iter().sum();
            CandidateEvaluation {
                node: e.node,
                values: e.steps.clone(),
                ranks: d.iter().map(|s| s.iter().map(|r| *r as f64 / 2.0).collect()).collect(),
                mean_ranks: step_sums.iter().map(|s| *s as f64 / denom).collect(),
                objective: score as f64 / denom,
                score,
            }
        })
        .collect();
    out.sort_by(|a, b| a.score.cmp(&b.score).then(a.node.cmp(&b.node)));
    Ok(out)
}

/// A candidate grip location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Candidate {
    pub node: usize,
    pub grip: GripPoint,
}

/// Designated grip nodes of the placed bricks, minus gripped and base nodes.
/// `keep` is a further filter hook (e.g. reachability); pass `|_| true` for none.
pub fn enumerate_candidates(
    layout: &ArchLayout,
    placed: usize,
    grips: &GripSet,
    keep: impl Fn(&Candidate) -> bool,
) -> Result<Vec<Candidate>> {
    if placed == 0 {
        return Err(Error::Optimization("no bricks placed".into()));
    }
    let model = layout.network(placed, JointSpec::default(), 0.0)?;
    let mut taken = Vec::new();
    for g in grips.iter().flatten() {
        taken.push(layout.grip_node(&model, g.brick, g.slot)?);
    }
    let base: Vec<usize> = model
        .supports
        .iter()
        .filter(|s| s.kind == SupportKind::FixedBase)
        .map(|s| s.node)
        .collect();
    let mut out: Vec<Candidate> = Vec::new();
    for brick in 1..=placed {
        for slot in 0..2 {
            let node = layout.grip_node(&model, brick, slot)?;
            if taken.contains(&node) || base.contains(&node) || out.iter().any(|c| c.node == node) {
                continue;
            }
            let c = Candidate {
                node,
                grip: GripPoint { brick, slot },
            };
            if keep(&c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Counts candidate structural solves and tracks the worst equilibrium residual.
#[derive(Debug, Default)]
pub struct SolveCounter {
    solves: AtomicUsize,
    worst: AtomicU64,
}

impl SolveCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> usize {
        self.solves.load(AtomicOrdering::Relaxed)
    }

    /// Largest relative imbalance seen over successful solves.
    pub fn worst_imbalance(&self) -> f64 {
        f64::from_bits(self.worst.load(AtomicOrdering::Relaxed))
    }

    fn add(&self, n: usize) {
        self.solves.fetch_add(n, AtomicOrdering::Relaxed);
    }

    fn record(&self, imbalance: f64) {
        // Bit patterns of non-negative floats order like the floats.
        self.worst.fetch_max(imbalance.abs().to_bits(), AtomicOrdering::Relaxed);
    }
}

/// One horizon step: bricks present and the grips of the other robots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonStep {
    pub step: usize,
    pub placed: usize,
    pub grips: GripSet,
    /// Whether the optimised robot still holds the candidate at this step.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationCycle {
    pub id: usize,
    pub robot: Robot,
    pub phase: Phase,
    pub horizon: Vec<usize>,
    pub chosen: Candidate,
    pub table: Vec<CandidateEvaluation>,
    pub candidates: Vec<Candidate>,
}

/// Solves every candidate on every horizon step and picks the best rank sum.
#[allow(clippy::too_many_arguments)]
pub fn optimize_support(
    layout: &ArchLayout,
    id: usize,
    robot: Robot,
    candidates: &[Candidate],
    horizon: &[HorizonStep],
    phase: Phase,
    joint: JointSpec,
    gravity: f64,
    counter: &SolveCounter,
) -> Result<OptimizationCycle> {
    if horizon.is_empty() {
        return Err(Error::Optimization(format!("cycle O{id}: empty horizon")));
    }
    if candidates.is_empty() {
        return Err(Error::Optimization(format!("cycle O{id}: no candidates")));
    }
    let evals: Vec<CandidateValues> = candidates
        .par_iter()
        .map(|c| {
            let steps = horizon
                .iter()
                .map(|h| {
                    let mut grips = h.grips;
                    if h.holds {
                        grips[robot.index()] = Some(c.grip);
                    }
                    analyse_state(layout, h.placed, &grips, joint, gravity).ok().map(|(m, r)| {
                        counter.record(r);
                        criteria(&m, phase, robot)
                    })
                })
                .collect();
            CandidateValues { node: c.node, steps }
        })
        .collect();
    counter.add(candidates.len() * horizon.len());
    if evals.iter().all(|e| e.steps.iter().all(|s| s.is_none())) {
        return Err(Error::Optimization(format!("cycle O{id}: every candidate is singular")));
    }
    let table = rank_objective(&evals, phase)?;
    let best = table[0].node;
    let chosen = *candidates
        .iter()
        .find(|c| c.node == best)
        .expect("ranked node comes from the candidate list");
    Ok(OptimizationCycle {
        id,
        robot,
        phase,
        horizon: horizon.iter().map(|h| h.step).collect(),
        chosen,
        table,
        candidates: candidates.to_vec(),
    })
}

fn phase_for(horizon: &[usize], crown_step: usize) -> Phase {
    if horizon.iter().any(|&s| s > crown_step) {
        Phase::PostCrown
    } else {
        Phase::PreCrown
    }
}

/// Plan with its optimisation cycles and the number of candidate solves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizedPlan {
    pub plan: SequencePlan,
    pub cycles: Vec<OptimizationCycle>,
    pub solves: usize,
    /// Worst relative equilibrium residual over the candidate solves.
    pub worst_imbalance: f64,
}

/// Sequential plan with rob3 moved to an optimised node around each
/// intermediate release from the first critical step on.
pub fn gen_modified_sequential(layout: &ArchLayout, joint: JointSpec, gravity: f64) -> Result<OptimizedPlan> {
    let n = layout.n_bricks();
    if n < 2 {
        return Err(Error::Optimization("modified sequential plan needs at least 2 bricks".into()));
    }
    let base = gen_sequential(n);
    let critical = critical_steps(&base, layout)?;
    let crown = crate::sequences::crown_step(&base);
    let counter = SolveCounter::new();
    let Some(&first) = critical.first() else {
        let mut plan = base;
        plan.method = Method::ModifiedSequential;
        return Ok(OptimizedPlan {
            plan,
            cycles: Vec::new(),
            solves: 0,
            worst_imbalance: 0.0,
        });
    };
    let windows: Vec<usize> = (first..=2 * n - 3).step_by(2).collect();
    let mut b = PlanBuilder::new(Method::ModifiedSequential, n);
    let mut cycles = Vec::new();
    let mut k = 0;
    while k < base.steps.len() {
        let s = base.steps[k].index;
        if windows.contains(&s) {
            let before = b.grips;
            let horizon: Vec<HorizonStep> = [
                (s, base.steps[k - 1].placed, before),
                (s, base.steps[k].placed, base.steps[k].grips),
                (s + 1, base.steps[k + 1].placed, base.steps[k + 1].grips),
            ]
            .iter()
            .map(|&(step, placed, grips)| HorizonStep {
                step,
                placed,
                grips,
                holds: true,
            })
            .collect();
            let candidates = enumerate_candidates(layout, horizon[0].placed, &before, |_| true)?;
            let horizon_ids: Vec<usize> = vec![s - 1, s, s + 1];
            let cycle = optimize_support(
                layout,
                cycles.len() + 1,
                Robot::Rob3,
                &candidates,
                &horizon,
                phase_for(&horizon_ids, crown),
                joint,
                gravity,
                &counter,
            )?;
            b.move_to(Robot::Rob3, cycle.chosen.grip);
            replay(&mut b, &base.steps[k].action);
            replay(&mut b, &base.steps[k + 1].action);
            b.release(&[Robot::Rob3]);
            let offset = b.plan.steps.len() - 4;
            let mut cycle = cycle;
            cycle.horizon = vec![offset + 1, offset + 2, offset + 3];
            cycles.push(cycle);
            k += 2;
        } else {
            replay(&mut b, &base.steps[k].action);
            k += 1;
        }
    }
    crate::sequences::validate_plan(&b.plan)?;
    Ok(OptimizedPlan {
        plan: b.plan,
        cycles,
        solves: counter.get(),
        worst_imbalance: counter.worst_imbalance(),
    })
}

fn replay(b: &mut PlanBuilder, action: &Action) {
    match action {
        Action::Place { robot, grip, .. } => b.place(*robot, grip.slot),
        Action::Release { robots } => {
            if robots.len() > 1 || b.placed == b.plan.n_bricks {
                b.release_all()
            } else {
                b.release(robots)
            }
        }
        Action::Move { robot, grip } => b.move_to(*robot, *grip),
    }
}

/// Result of evaluating one plan step for every candidate of a cycle.
struct PendingCycle {
    id: usize,
    robot: Robot,
    candidates: Vec<Candidate>,
    /// Builder snapshot at the decision step (before the choice is applied).
    start: PlanBuilder,
}

/// The cascading three-robot plan: for every brick beyond the second a free
/// robot moves to an optimised node, the previously optimised robot lets go
/// and places the next brick, and the holder of the older brick releases.
pub fn gen_optimized3(layout: &ArchLayout, joint: JointSpec, gravity: f64) -> Result<OptimizedPlan> {
    let n = layout.n_bricks();
    if n < 3 {
        return Err(Error::Optimization("optimized three-robot plan needs at least 3 bricks".into()));
    }
    let counter = SolveCounter::new();
    let crown_brick = n.div_ceil(2);
    // crown is placed at step 4b − 11 for b ≥ 4, at step b for b ≤ 3
    let crown = if crown_brick <= 3 { crown_brick } else { 4 * crown_brick - 11 };
    let mut cycles: Vec<OptimizationCycle> = Vec::new();

    let mut b = PlanBuilder::new(Method::Optimized3, n);
    b.place(Robot::Rob1, Robot::Rob1.default_slot());
    b.place(Robot::Rob2, Robot::Rob2.default_slot());

    // O1: rob3 places brick 3 at an optimised node of that brick.
    let pending = PendingCycle {
        id: 1,
        robot: Robot::Rob3,
        candidates: brick_candidates(layout, 3)?,
        start: b.clone(),
    };
    let body = move |b: &mut PlanBuilder, grip: GripPoint| {
        b.place(Robot::Rob3, grip.slot);
        match n {
            3 => b.release_all(),
            4 => b.release(&[Robot::Rob1]),
            _ => {
                b.release(&[Robot::Rob1]);
                b.place(Robot::Rob1, Robot::Rob1.default_slot());
                b.release(&[Robot::Rob2]);
            }
        }
    };
    let cycle = run_cycle(layout, pending, crown, joint, gravity, &counter, body)?;
    body(&mut b, cycle.chosen.grip);
    cycles.push(cycle);

    // Roles: `opt` holds the last optimised node, `newest` the newest brick.
    let (mut opt, mut newest, mut free) = (Robot::Rob3, Robot::Rob1, Robot::Rob2);
    for k in 2..n.saturating_sub(2) {
        let last = k + 3 == n;
        let pending = PendingCycle {
            id: k,
            robot: free,
            candidates: enumerate_candidates(layout, b.placed, &b.grips, |_| true)?,
            start: b.clone(),
        };
        let (f, o, nw) = (free, opt, newest);
        let body = move |b: &mut PlanBuilder, grip: GripPoint| {
            b.move_to(f, grip);
            b.release(&[o]);
            if !last {
                b.place(o, o.default_slot());
                b.release(&[nw]);
            }
        };
        let cycle = run_cycle(layout, pending, crown, joint, gravity, &counter, body)?;
        body(&mut b, cycle.chosen.grip);
        cycles.push(cycle);
        (opt, newest, free) = (f, o, nw);
    }

    if n > 3 {
        // Final cycle: the free robot chooses its node on the last brick.
        let placer = Robot::ALL
            .into_iter()
            .find(|r| b.grips[r.index()].is_none())
            .ok_or_else(|| Error::Optimization("no free robot for the last brick".into()))?;
        let pending = PendingCycle {
            id: cycles.len() + 1,
            robot: placer,
            candidates: brick_candidates(layout, n)?,
            start: b.clone(),
        };
        let body = move |b: &mut PlanBuilder, grip: GripPoint| {
            b.place(placer, grip.slot);
            b.release_all();
        };
        let cycle = run_cycle(layout, pending, crown, joint, gravity, &counter, body)?;
        body(&mut b, cycle.chosen.grip);
        cycles.push(cycle);
    }

    check_design_criteria(&b.plan)?;
    crate::sequences::validate_plan(&b.plan)?;
    Ok(OptimizedPlan {
        plan: b.plan,
        cycles,
        solves: counter.get(),
        worst_imbalance: counter.worst_imbalance(),
    })
}

fn brick_candidates(layout: &ArchLayout, brick: usize) -> Result<Vec<Candidate>> {
    let model = layout.network(brick, JointSpec::default(), 0.0)?;
    let base: Vec<usize> = model
        .supports
        .iter()
        .filter(|s| s.kind == SupportKind::FixedBase)
        .map(|s| s.node)
        .collect();
    let all: Vec<Candidate> = (0..2)
        .map(|slot| {
            Ok(Candidate {
                node: layout.grip_node(&model, brick, slot)?,
                grip: GripPoint { brick, slot },
            })
        })
        .collect::<Result<_>>()?;
    let free: Vec<Candidate> = all.iter().copied().filter(|c| !base.contains(&c.node)).collect();
    // a closing brick may have every grip node on the springing
    Ok(if free.is_empty() { all } else { free })
}

/// Scripts a cycle's steps for every candidate, solves them, and ranks.
#[allow(clippy::too_many_arguments)]
fn run_cycle(
    layout: &ArchLayout,
    pending: PendingCycle,
    crown: usize,
    joint: JointSpec,
    gravity: f64,
    counter: &SolveCounter,
    body: impl Fn(&mut PlanBuilder, GripPoint),
) -> Result<OptimizationCycle> {
    let first = pending
        .candidates
        .first()
        .ok_or_else(|| Error::Optimization(format!("cycle O{}: no candidates", pending.id)))?;
    let mut probe = pending.start.clone();
    body(&mut probe, first.grip);
    let start = pending.start.plan.steps.len();
    let horizon: Vec<HorizonStep> = probe.plan.steps[start..]
        .iter()
        .map(|s| {
            let mut grips = s.grips;
            let holds = grips[pending.robot.index()] == Some(first.grip);
            if holds {
                grips[pending.robot.index()] = None;
            }
            HorizonStep {
                step: s.index,
                placed: s.placed,
                grips,
                holds,
            }
        })
        .collect();
    let ids: Vec<usize> = horizon.iter().map(|h| h.step).collect();
    optimize_support(
        layout,
        pending.id,
        pending.robot,
        &pending.candidates,
        &horizon,
        phase_for(&ids, crown),
        joint,
        gravity,
        counter,
    )
}

/// At least two grips after step 2 until the arch closes, and the newest
/// brick gripped whenever the arch is open.
pub fn check_design_criteria(plan: &SequencePlan) -> Result<()> {
    for s in &plan.steps {
        if s.placed == plan.n_bricks && matches!(s.action, Action::Release { .. }) {
            continue;
        }
        if s.index > 2 && s.grip_count() < 2 {
            return Err(Error::Optimization(format!("step {}: fewer than two grips", s.index)));
        }
        if !s.grips.iter().flatten().any(|g| g.brick == s.placed) {
            return Err(Error::Optimization(format!("step {}: newest brick not gripped", s.index)));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetMode {
    Simplified,
    Exhaustive,
}

/// Candidate analyses needed to build up to `n_max` bricks.
pub fn analysis_budget(n_max: usize, mode: BudgetMode) -> Result<u64> {
    if n_max < 3 {
        return Err(Error::Optimization(format!("budget needs n_max ≥ 3, got {n_max}")));
    }
    Ok((3..=n_max as u64)
        .map(|n| match mode {
            BudgetMode::Simplified => 4 * 2 * n,
            BudgetMode::Exhaustive => 3 * 2 * n + (2 * n) * (2 * (n - 1)),
        })
        .sum())
}
