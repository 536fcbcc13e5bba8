//! Two-robot fabrication plans and their staged simulation.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArchLayout;
use crate::model::{JointSpec, NetworkModel, Orientation, SupportKind, SupportLabel};
use crate::solver::{solve_static, step_metrics, StepMetrics};

/// Lateral offset beyond which a single grip counts as off-centre.
pub const OFF_CENTRE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Robot {
    Rob1,
    Rob2,
    Rob3,
}

impl Robot {
    pub const ALL: [Robot; 3] = [Robot::Rob1, Robot::Rob2, Robot::Rob3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> SupportLabel {
        SupportLabel::robot(self.index())
    }

    /// Designated grip slot the robot uses when placing a brick.
    pub fn default_slot(self) -> usize {
        match self {
            Robot::Rob2 => 1,
            Robot::Rob1 | Robot::Rob3 => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Robot::Rob1 => "rob1",
            Robot::Rob2 => "rob2",
            Robot::Rob3 => "rob3",
        }
    }
}

/// A designated grip node, identified by brick and slot (0 or 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GripPoint {
    pub brick: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Action {
    Place { brick: usize, robot: Robot, grip: GripPoint },
    Release { robots: Vec<Robot> },
    Move { robot: Robot, grip: GripPoint },
}

impl Action {
    pub fn code(&self) -> &'static str {
        match self {
            Action::Place { .. } => "P",
            Action::Release { .. } => "R",
            Action::Move { .. } => "M",
        }
    }
}

/// Grip state indexed by robot.
pub type GripSet = [Option<GripPoint>; 3];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FabStep {
    /// 1-based step number.
    pub index: usize,
    pub action: Action,
    /// Bricks in place after the step.
    pub placed: usize,
    /// Supports expected after the step.
    pub grips: GripSet,
}

impl FabStep {
    pub fn grip_count(&self) -> usize {
        self.grips.iter().flatten().count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sequential,
    Cantilever,
    Optimized3,
    ModifiedSequential,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sequential => "sequential",
            Method::Cantilever => "cantilever",
            Method::Optimized3 => "optimized3",
            Method::ModifiedSequential => "modified-sequential",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequencePlan {
    pub method: Method,
    pub n_bricks: usize,
    pub steps: Vec<FabStep>,
}

/// Incremental plan writer that tracks the grip state.
#[derive(Clone, Debug)]
pub(crate) struct PlanBuilder {
    pub plan: SequencePlan,
    pub placed: usize,
    pub grips: GripSet,
}

impl PlanBuilder {
    pub fn new(method: Method, n_bricks: usize) -> Self {
        PlanBuilder {
            plan: SequencePlan {
                method,
                n_bricks,
                steps: Vec::new(),
            },
            placed: 0,
            grips: [None; 3],
        }
    }

    fn push(&mut self, action: Action) {
        let index = self.plan.steps.len() + 1;
        self.plan.steps.push(FabStep {
            index,
            action,
            placed: self.placed,
            grips: self.grips,
        });
    }

    pub fn place(&mut self, robot: Robot, slot: usize) {
        self.placed += 1;
        let grip = GripPoint {
            brick: self.placed,
            slot,
        };
        self.grips[robot.index()] = Some(grip);
        self.push(Action::Place {
            brick: self.placed,
            robot,
            grip,
        });
    }

    pub fn release(&mut self, robots: &[Robot]) {
        for r in robots {
            self.grips[r.index()] = None;
        }
        self.push(Action::Release {
            robots: robots.to_vec(),
        });
    }

    pub fn release_all(&mut self) {
        let robots: Vec<Robot> = Robot::ALL
            .into_iter()
            .filter(|r| self.grips[r.index()].is_some())
            .collect();
        self.release(&robots);
    }

    pub fn move_to(&mut self, robot: Robot, grip: GripPoint) {
        self.grips[robot.index()] = Some(grip);
        self.push(Action::Move { robot, grip });
    }
}

/// Two robots alternate single placements; each release leaves only the
/// newest brick gripped.
pub fn gen_sequential(n_bricks: usize) -> SequencePlan {
    let mut b = PlanBuilder::new(Method::Sequential, n_bricks);
    for brick in 1..=n_bricks {
        let robot = if brick % 2 == 1 { Robot::Rob1 } else { Robot::Rob2 };
        b.place(robot, robot.default_slot());
        if brick == n_bricks {
            if n_bricks > 1 {
                b.release_all();
            }
        } else if brick > 1 {
            let other = if robot == Robot::Rob1 { Robot::Rob2 } else { Robot::Rob1 };
            b.release(&[other]);
        }
    }
    b.plan
}

/// One robot holds a vertical brick while the other places the next three
/// bricks; the holding role swaps at each vertical brick.
pub fn gen_cantilever(n_bricks: usize) -> SequencePlan {
    let mut b = PlanBuilder::new(Method::Cantilever, n_bricks);
    let mut holder = Robot::Rob1;
    for brick in 1..=n_bricks {
        let placer = if brick == 1 {
            Robot::Rob1
        } else if holder == Robot::Rob1 {
            Robot::Rob2
        } else {
            Robot::Rob1
        };
        b.place(placer, placer.default_slot());
        if brick == n_bricks {
            if n_bricks > 1 {
                b.release_all();
            }
        } else if brick == 1 {
            holder = Robot::Rob1;
        } else if brick % 3 == 1 {
            b.release(&[holder]);
            holder = placer;
        } else {
            b.release(&[placer]);
        }
    }
    b.plan
}

/// Replays a plan and checks ordering and support continuity.
pub fn validate_plan(plan: &SequencePlan) -> Result<()> {
    if plan.n_bricks == 0 {
        return Err(Error::InvalidPlan("plan has no bricks".into()));
    }
    let mut placed = 0usize;
    let mut grips: GripSet = [None; 3];
    for step in &plan.steps {
        let at = step.index;
        match &step.action {
            Action::Place { brick, robot, grip } => {
                if *brick != placed + 1 {
                    return Err(Error::InvalidPlan(format!(
                        "step {at}: brick {brick} placed out of order"
                    )));
                }
                if grips[robot.index()].is_some() {
                    return Err(Error::InvalidPlan(format!(
                        "step {at}: {} places while still gripping",
                        robot.name()
                    )));
                }
                placed += 1;
                if grip.brick != *brick {
                    return Err(Error::InvalidPlan(format!(
                        "step {at}: placing robot must grip the placed brick"
                    )));
                }
                grips[robot.index()] = Some(*grip);
            }
            Action::Release { robots } => {
                if robots.is_empty() {
                    return Err(Error::InvalidPlan(format!("step {at}: empty release")));
                }
                for r in robots {
                    if grips[r.index()].take().is_none() {
                        return Err(Error::InvalidPlan(format!(
                            "step {at}: {} is not gripping",
                            r.name()
                        )));
                    }
                }
            }
            Action::Move { robot, grip } => {
                if grip.brick == 0 || grip.brick > placed || grip.slot > 1 {
                    return Err(Error::InvalidPlan(format!(
                        "step {at}: {} moves to an unplaced brick",
                        robot.name()
                    )));
                }
                grips[robot.index()] = Some(*grip);
            }
        }
        let occupied: Vec<GripPoint> = grips.iter().flatten().copied().collect();
        let unique: BTreeSet<GripPoint> = occupied.iter().copied().collect();
        if unique.len() != occupied.len() {
            return Err(Error::InvalidPlan(format!("step {at}: two robots share a grip node")));
        }
        if step.placed != placed || step.grips != grips {
            return Err(Error::InvalidPlan(format!(
                "step {at}: recorded support set disagrees with the actions"
            )));
        }
        if occupied.is_empty() && placed < plan.n_bricks {
            return Err(Error::InvalidPlan(format!(
                "step {at}: structure left without support"
            )));
        }
    }
    if placed != plan.n_bricks {
        return Err(Error::InvalidPlan(format!(
            "plan places {placed} of {} bricks",
            plan.n_bricks
        )));
    }
    if plan.n_bricks > 1 && grips.iter().any(|g| g.is_some()) {
        return Err(Error::InvalidPlan("plan ends with robots still gripping".into()));
    }
    Ok(())
}

/// Partial-arch network for a step's placed bricks and grips.
pub fn step_model(
    layout: &ArchLayout,
    placed: usize,
    grips: &GripSet,
    joint: JointSpec,
    gravity: f64,
) -> Result<NetworkModel> {
    let mut model = layout.network(placed, joint, gravity)?;
    for robot in Robot::ALL {
        if let Some(g) = grips[robot.index()] {
            let node = layout.grip_node(&model, g.brick, g.slot)?;
            // a grip on a closed springing adds nothing to its fixity
            if model.supports.iter().any(|s| s.node == node && s.kind == SupportKind::FixedBase) {
                continue;
            }
            model.add_support(node, SupportKind::RobotGrip, robot.label())?;
        }
    }
    Ok(model)
}

/// Solves one snapshot and summarises it.
pub fn analyse_state(
    layout: &ArchLayout,
    placed: usize,
    grips: &GripSet,
    joint: JointSpec,
    gravity: f64,
) -> Result<(StepMetrics, f64)> {
    let model = step_model(layout, placed, grips, joint, gravity)?;
    let result = solve_static(&model)?;
    Ok((step_metrics(&result, &model), result.max_imbalance()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: usize,
    pub kind: String,
    pub total_bricks: usize,
    /// Gripped brick and node id for each robot.
    pub grips: [Option<(usize, usize)>; 3],
    pub metrics: StepMetrics,
    pub imbalance: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TensionStats {
    pub avg_full: f64,
    pub avg_before_crown: f64,
    pub avg_after_crown: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub method: Method,
    pub n_bricks: usize,
    /// Step that places the crown brick.
    pub crown_step: usize,
    pub rows: Vec<StepRow>,
    /// Off-centre single-grip steps, excluded from the C₁/C₂ baselines.
    pub critical: Vec<usize>,
    pub m_sup_avg: f64,
    pub delta_max_avg: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub tension: TensionStats,
    pub max_f_rob: [f64; 3],
    pub max_m_sup: f64,
    pub max_delta: f64,
}

impl SequenceReport {
    pub fn from_rows(
        method: Method,
        n_bricks: usize,
        crown_step: usize,
        rows: Vec<StepRow>,
        critical: Vec<usize>,
    ) -> Self {
        let typical: Vec<&StepRow> = rows.iter().filter(|r| !critical.contains(&r.step)).collect();
        let count = typical.len().max(1) as f64;
        let m_sup_avg = typical.iter().map(|r| r.metrics.m_sup).sum::<f64>() / count;
        let delta_max_avg = typical.iter().map(|r| r.metrics.delta_max).sum::<f64>() / count;
        let ratio = |v: f64, avg: f64| if avg > 0.0 { v / avg } else { 0.0 };
        let c1 = rows.iter().map(|r| ratio(r.metrics.m_sup, m_sup_avg)).collect();
        let c2 = rows.iter().map(|r| ratio(r.metrics.delta_max, delta_max_avg)).collect();
        let mean = |it: Vec<f64>| if it.is_empty() { 0.0 } else { it.iter().sum::<f64>() / it.len() as f64 };
        let tension = TensionStats {
            avg_full: mean(rows.iter().map(|r| r.metrics.t_max).collect()),
            avg_before_crown: mean(rows.iter().filter(|r| r.step <= crown_step).map(|r| r.metrics.t_max).collect()),
            avg_after_crown: mean(rows.iter().filter(|r| r.step > crown_step).map(|r| r.metrics.t_max).collect()),
            max: rows.iter().map(|r| r.metrics.t_max).fold(0.0, f64::max),
        };
        let mut max_f_rob = [0.0; 3];
        for r in &rows {
            for (k, f) in r.metrics.f_rob.iter().enumerate() {
                max_f_rob[k] = f64::max(max_f_rob[k], f.abs());
            }
        }
        SequenceReport {
            method,
            n_bricks,
            crown_step,
            critical,
            m_sup_avg,
            delta_max_avg,
            c1,
            c2,
            tension,
            max_f_rob,
            max_m_sup: rows.iter().map(|r| r.metrics.m_sup).fold(0.0, f64::max),
            max_delta: rows.iter().map(|r| r.metrics.delta_max).fold(0.0, f64::max),
            rows,
        }
    }

    pub fn row(&self, step: usize) -> Option<&StepRow> {
        step.checked_sub(1).and_then(|k| self.rows.get(k))
    }

    /// Largest robot reaction over all robots and steps.
    pub fn max_robot_force(&self) -> f64 {
        self.max_f_rob.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_imbalance(&self) -> f64 {
        self.rows.iter().map(|r| r.imbalance).fold(0.0, f64::max)
    }
}

/// Step placing the crown brick, or the last step if it is never placed.
pub fn crown_step(plan: &SequencePlan) -> usize {
    let crown = plan.n_bricks.div_ceil(2);
    plan.steps
        .iter()
        .find(|s| matches!(s.action, Action::Place { brick, .. } if brick == crown))
        .map(|s| s.index)
        .unwrap_or(plan.steps.len())
}

/// Simulates every step of a plan as an independent static snapshot.
pub fn simulate_plan(
    plan: &SequencePlan,
    layout: &ArchLayout,
    joint: JointSpec,
    gravity: f64,
) -> Result<SequenceReport> {
    validate_plan(plan)?;
    if plan.n_bricks != layout.n_bricks() {
        return Err(Error::InvalidPlan(format!(
            "plan has {} bricks but the arch has {}",
            plan.n_bricks,
            layout.n_bricks()
        )));
    }
    let rows: Vec<Result<StepRow>> = plan
        .steps
        .par_iter()
        .map(|step| {
            let model = step_model(layout, step.placed, &step.grips, joint, gravity)?;
            let result = solve_static(&model).map_err(|e| {
                Error::InvalidPlan(format!("step {}: structure cannot be solved ({e})", step.index))
            })?;
            let mut grips = [None; 3];
            for r in Robot::ALL {
                if let Some(g) = step.grips[r.index()] {
                    grips[r.index()] = Some((g.brick, layout.grip_node(&model, g.brick, g.slot)?));
                }
            }
            Ok(StepRow {
                step: step.index,
                kind: step.action.code().to_string(),
                total_bricks: step.placed,
                grips,
                metrics: step_metrics(&result, &model),
                imbalance: result.max_imbalance(),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let critical = critical_steps(plan, layout)?;
    Ok(SequenceReport::from_rows(plan.method, plan.n_bricks, crown_step(plan), rows, critical))
}

/// Lateral grip offset from the rib centreline.
fn lateral_offset(layout: &ArchLayout, g: GripPoint) -> Result<f64> {
    let brick = layout.brick(g.brick)?;
    let local = brick.local_nodes()[2 + crate::geometry::grip_slot(brick, g.slot)];
    Ok(brick.pose.to_world(&local).y)
}

/// Release steps that leave a single robot gripping off the rib centreline.
pub fn critical_steps(plan: &SequencePlan, layout: &ArchLayout) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for step in &plan.steps {
        if !matches!(step.action, Action::Release { .. }) || step.placed >= plan.n_bricks {
            continue;
        }
        let held: Vec<GripPoint> = step.grips.iter().flatten().copied().collect();
        if let [g] = held[..] {
            let brick = layout.brick(g.brick)?;
            if brick.orientation == Orientation::Horizontal
                && lateral_offset(layout, g)?.abs() > OFF_CENTRE_TOL
            {
                out.push(step.index);
            }
        }
    }
    Ok(out)
}

/// Steps at which two plans have the same bricks and grips.
pub fn shared_steps(a: &SequencePlan, b: &SequencePlan) -> Vec<usize> {
    a.steps
        .iter()
        .zip(b.steps.iter())
        .filter(|(x, y)| x.placed == y.placed && x.grips == y.grips)
        .map(|(x, _)| x.index)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensionRow {
    pub method: Method,
    pub stats: TensionStats,
}

pub fn tension_summary(reports: &[&SequenceReport]) -> Vec<TensionRow> {
    reports
        .iter()
        .map(|r| TensionRow {
            method: r.method,
            stats: r.tension,
        })
        .collect()
}

pub const STEP_COLUMNS: [&str; 21] = [
    "Step", "Type", "Total Bricks", "rob1 b", "rob1 n", "rob2 b", "rob2 n", "rob3 b", "rob3 n", "F_rob1",
    "F_rob2", "F_rob3", "F_sup", "M_sup", "F_min", "F_max", "F_avg", "T_%", "Δ_max", "Δ_avg",
    "Δ_σ",
];

/// Writes the per-step table; `provenance` lines go first as `#` comments.
pub fn write_steps_csv<W: Write>(mut out: W, report: &SequenceReport, provenance: &str) -> Result<()> {
    for line in provenance.lines() {
        writeln!(out, "{}", format!("# {line}").trim_end())?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STEP_COLUMNS)?;
    for r in &report.rows {
        let m = &r.metrics;
        let mut rec = vec![r.step.to_string(), r.kind.clone(), r.total_bricks.to_string()];
        for g in &r.grips {
            match g {
                Some((b, n)) => {
                    rec.push(b.to_string());
                    rec.push(n.to_string());
                }
                None => {
                    rec.push(String::new());
                    rec.push(String::new());
                }
            }
        }
        for v in [
            m.f_rob[0], m.f_rob[1], m.f_rob[2], m.f_sup, m.m_sup, m.f_min, m.f_max, m.f_avg, m.t_pct,
            m.delta_max, m.delta_avg, m.delta_std,
        ] {
            rec.push(format!("{v:.4}"));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregates of one run for `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub method: Method,
    pub n_bricks: usize,
    pub steps: usize,
    pub crown_step: usize,
    pub m_sup_avg: f64,
    pub delta_max_avg: f64,
    pub max_m_sup: f64,
    pub max_delta: f64,
    pub max_f_rob: [f64; 3],
    pub tension: TensionStats,
    pub critical: Vec<CriticalRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub step: usize,
    pub m_sup: f64,
    pub c1: f64,
    pub delta_max: f64,
    pub c2: f64,
}

impl ReportSummary {
    pub fn new(report: &SequenceReport) -> Self {
        ReportSummary {
            method: report.method,
            n_bricks: report.n_bricks,
            steps: report.rows.len(),
            crown_step: report.crown_step,
            m_sup_avg: report.m_sup_avg,
            delta_max_avg: report.delta_max_avg,
            max_m_sup: report.max_m_sup,
            max_delta: report.max_delta,
            max_f_rob: report.max_f_rob,
            tension: report.tension,
            critical: report
                .critical
                .iter()
                .filter_map(|&s| {
                    let r = report.row(s)?;
                    Some(CriticalRow {
                        step: s,
                        m_sup: r.metrics.m_sup,
                        c1: report.c1[s - 1],
                        delta_max: r.metrics.delta_max,
                        c2: report.c2[s - 1],
                    })
                })
                .collect(),
        }
    }
}
