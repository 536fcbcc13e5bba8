//! Linear static analysis of a network model.
//!
//! Every edge is a two-node link referenced to its inner end: the far node
//! follows the near node's rigid motion and any mismatch is resisted by a
//! translational and a rotational spring. Joint edges use the calibrated
//! joint springs; rigid edges use a penalty multiple of the stiffest joint.
//! Links between two inner nodes have no natural near end and use the mean
//! rotation of both.

use std::collections::VecDeque;

use nalgebra::{SMatrix, SVector, Vector3};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EdgeKind, NetworkModel, SupportKind, SupportLabel};

pub const CONDITION_WARNING: f64 = 1e12;
const PIVOT_FLOOR: f64 = 1e-13;

type Mat6x12 = SMatrix<f64, 6, 12>;
type Mat12 = SMatrix<f64, 12, 12>;
type Vec12 = SVector<f64, 12>;

#[derive(Clone, Copy, Debug)]
pub struct LinkStiffness {
    pub p: usize,
    pub q: usize,
    pub kt: f64,
    pub kr: f64,
    pub d: Vector3<f64>,
    /// Offset rotation is the mean of both end rotations instead of the
    /// near end's, which makes the link indifferent to its direction.
    pub centred: bool,
}

impl LinkStiffness {
    fn strain_matrix(&self) -> Mat6x12 {
        let mut b = Mat6x12::zeros();
        let d = self.d;
        for i in 0..3 {
            b[(i, i)] = -1.0;
            b[(i, 6 + i)] = 1.0;
            b[(3 + i, 3 + i)] = -1.0;
            b[(3 + i, 9 + i)] = 1.0;
        }
        // d × θ
        let (wp, wq) = if self.centred { (0.5, 0.5) } else { (1.0, 0.0) };
        for (off, w) in [(3, wp), (9, wq)] {
            if w == 0.0 {
                continue;
            }
            b[(0, off + 1)] = -d.z * w;
            b[(0, off + 2)] = d.y * w;
            b[(1, off)] = d.z * w;
            b[(1, off + 2)] = -d.x * w;
            b[(2, off)] = -d.y * w;
            b[(2, off + 1)] = d.x * w;
        }
        b
    }

    fn rigidities(&self) -> [f64; 6] {
        [self.kt, self.kt, self.kt, self.kr, self.kr, self.kr]
    }

    pub fn matrix(&self) -> Mat12 {
        let b = self.strain_matrix();
        let mut db = b;
        for (r, k) in self.rigidities().iter().enumerate() {
            for c in 0..12 {
                db[(r, c)] *= k;
            }
        }
        let k = b.transpose() * db;
        (k + k.transpose()) * 0.5
    }

    /// Spring resultants (translation, rotation) for element end displacements.
    pub fn resultants(&self, ue: &Vec12) -> SVector<f64, 6> {
        let mut s = self.strain_matrix() * ue;
        for (r, k) in self.rigidities().iter().enumerate() {
            s[r] *= k;
        }
        s
    }

    pub fn end_forces(&self, ue: &Vec12) -> Vec12 {
        self.strain_matrix().transpose() * self.resultants(ue)
    }

    pub fn axial(&self, ue: &Vec12) -> f64 {
        let s = self.resultants(ue);
        let n = self.d.norm();
        if n == 0.0 {
            return 0.0;
        }
        Vector3::new(s[0], s[1], s[2]).dot(&(self.d / n))
    }
}

/// Per-edge link stiffnesses for a model.
pub fn link_stiffnesses(model: &NetworkModel) -> Vec<LinkStiffness> {
    let js = &model.joint_spec;
    let mut max_area = model
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Connection)
        .map(|e| e.section_area)
        .fold(0.0, f64::max);
    if max_area <= 0.0 {
        max_area = model
            .bricks
            .iter()
            .map(|b| {
                let d = b.brick.dims;
                (d.x * d.y).max(d.x * d.z).max(d.y * d.z) * 0.5
            })
            .fold(0.0, f64::max);
    }
    let rigid_t = js.rigid_factor * js.translational(max_area);
    let rigid_r = js.rigid_factor * js.rotational(max_area);
    model
        .edges
        .iter()
        .map(|e| {
            let (p, q) = e.endpoints;
            let (kt, kr) = match e.kind {
                EdgeKind::Connection => (
                    e.spring_factor * js.translational(e.section_area),
                    e.spring_factor * js.rotational(e.section_area),
                ),
                _ => (rigid_t, rigid_r),
            };
            LinkStiffness {
                p,
                q,
                kt,
                kr,
                d: model.nodes[q].position - model.nodes[p].position,
                centred: e.kind == EdgeKind::InternalRigid,
            }
        })
        .collect()
}

pub struct Assembly {
    pub n_nodes: usize,
    /// Free equation number per global DOF, `None` when constrained.
    pub free_index: Vec<Option<usize>>,
    pub n_free: usize,
    pub matrix: CscMatrix<f64>,
    pub rhs: Vec<f64>,
    pub links: Vec<LinkStiffness>,
}

impl Assembly {
    pub fn is_symmetric(&self) -> bool {
        let t = self.matrix.transpose();
        t.col_offsets() == self.matrix.col_offsets()
            && t.row_indices() == self.matrix.row_indices()
            && t.values() == self.matrix.values()
    }
}

fn check_connectivity(model: &NetworkModel) -> Result<()> {
    if model.supports.is_empty() {
        return Err(Error::NoSupports);
    }
    let n = model.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for e in &model.edges {
        adj[e.endpoints.0].push(e.endpoints.1);
        adj[e.endpoints.1].push(e.endpoints.0);
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = model.supports.iter().map(|s| s.node).collect();
    for &s in &queue {
        seen[s] = true;
    }
    while let Some(k) = queue.pop_front() {
        for &m in &adj[k] {
            if !seen[m] {
                seen[m] = true;
                queue.push_back(m);
            }
        }
    }
    let mut floating: Vec<usize> = model
        .nodes
        .iter()
        .filter(|nd| !seen[nd.id])
        .flat_map(|nd| nd.owner_bricks.iter().copied())
        .collect();
    floating.sort_unstable();
    floating.dedup();
    if floating.is_empty() {
        Ok(())
    } else {
        Err(Error::Floating { bricks: floating })
    }
}

/// Builds the reduced stiffness system over free DOFs.
pub fn assemble(model: &NetworkModel) -> Result<Assembly> {
    check_connectivity(model)?;
    let n_nodes = model.nodes.len();
    let mut constrained = vec![false; 6 * n_nodes];
    for s in &model.supports {
        for (k, c) in s.constrained().iter().enumerate() {
            if *c {
                constrained[6 * s.node + k] = true;
            }
        }
    }
    let mut free_index = vec![None; 6 * n_nodes];
    let mut n_free = 0;
    for (g, c) in constrained.iter().enumerate() {
        if !c {
            free_index[g] = Some(n_free);
            n_free += 1;
        }
    }
    let links = link_stiffnesses(model);
    let mut coo = CooMatrix::new(n_free, n_free);
    for link in &links {
        let ke = link.matrix();
        let dofs: Vec<Option<usize>> = (0..12)
            .map(|k| {
                let node = if k < 6 { link.p } else { link.q };
                free_index[6 * node + k % 6]
            })
            .collect();
        for r in 0..12 {
            let Some(fr) = dofs[r] else { continue };
            for c in 0..12 {
                let Some(fc) = dofs[c] else { continue };
                let v = ke[(r, c)];
                if v != 0.0 {
                    coo.push(fr, fc, v);
                }
            }
        }
    }
    let mut rhs = vec![0.0; n_free];
    for l in &model.loads {
        for k in 0..3 {
            if let Some(f) = free_index[6 * l.node + k] {
                rhs[f] += l.force[k];
            }
        }
    }
    let raw = CscMatrix::from(&coo);
    let matrix = (&raw + &raw.transpose()) * 0.5;
    Ok(Assembly {
        n_nodes,
        free_index,
        n_free,
        matrix,
        rhs,
        links,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReaction {
    pub node: usize,
    pub label: SupportLabel,
    pub kind: SupportKind,
    /// Force (N) then moment (N·m) exerted by the support on the structure.
    pub reaction: [f64; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub free_dofs: usize,
    /// ‖K u − f‖ / ‖f‖ over free DOFs.
    pub residual: f64,
    /// ‖Σ reactions + Σ loads‖ / Σ‖load‖ for forces.
    pub force_imbalance: f64,
    /// Same for moments about the origin, scaled by the model size.
    pub moment_imbalance: f64,
    pub condition_estimate: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub displacements: Vec<[f64; 6]>,
    pub reactions: Vec<SupportReaction>,
    pub element_axial: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl AnalysisResult {
    pub fn translation(&self, node: usize) -> Vector3<f64> {
        let u = self.displacements[node];
        Vector3::new(u[0], u[1], u[2])
    }

    pub fn max_imbalance(&self) -> f64 {
        self.diagnostics.force_imbalance.max(self.diagnostics.moment_imbalance)
    }
}

/// Solves the static problem.
pub fn solve_static(model: &NetworkModel) -> Result<AnalysisResult> {
    let asm = assemble(model)?;
    let n_nodes = asm.n_nodes;
    let mut u = vec![0.0; 6 * n_nodes];
    let mut condition = 1.0;
    if asm.n_free > 0 {
        let chol = CscCholesky::factor(&asm.matrix)
            .map_err(|_| Error::Singular("reduced stiffness is not positive definite".into()))?;
        let diag_k = diagonal(&asm.matrix);
        let l = chol.l();
        let mut lmin = f64::INFINITY;
        let mut lmax: f64 = 0.0;
        for (j, &dk) in diag_k.iter().enumerate() {
            let col = l.col(j);
            let lj = col
                .row_indices()
                .iter()
                .zip(col.values())
                .find(|(r, _)| **r == j)
                .map(|(_, v)| *v)
                .unwrap_or(0.0);
            if dk <= 0.0 || lj * lj < PIVOT_FLOOR * dk {
                return Err(Error::Singular(format!(
                    "near-zero pivot at equation {j} (unrestrained mechanism)"
                )));
            }
            lmin = lmin.min(lj);
            lmax = lmax.max(lj);
        }
        condition = (lmax / lmin).powi(2);
        let sol = chol.solve(&nalgebra::DVector::from_column_slice(&asm.rhs));
        for (g, f) in asm.free_index.iter().enumerate() {
            if let Some(f) = f {
                u[g] = sol[*f];
            }
        }
    }

    let mut f_int = vec![0.0; 6 * n_nodes];
    let mut axial = Vec::with_capacity(asm.links.len());
    for link in &asm.links {
        let mut ue = Vec12::zeros();
        for k in 0..6 {
            ue[k] = u[6 * link.p + k];
            ue[6 + k] = u[6 * link.q + k];
        }
        let fe = link.end_forces(&ue);
        for k in 0..6 {
            f_int[6 * link.p + k] += fe[k];
            f_int[6 * link.q + k] += fe[6 + k];
        }
        axial.push(link.axial(&ue));
    }
    let mut f_ext = vec![0.0; 6 * n_nodes];
    for l in &model.loads {
        for k in 0..3 {
            f_ext[6 * l.node + k] += l.force[k];
        }
    }

    let mut residual = 0.0;
    let mut fnorm = 0.0;
    for (g, f) in asm.free_index.iter().enumerate() {
        if f.is_some() {
            residual += (f_int[g] - f_ext[g]).powi(2);
            fnorm += f_ext[g].powi(2);
        }
    }
    let residual = if fnorm > 0.0 { (residual / fnorm).sqrt() } else { residual.sqrt() };

    let reactions: Vec<SupportReaction> = model
        .supports
        .iter()
        .map(|s| {
            let mut r = [0.0; 6];
            for (k, c) in s.constrained().iter().enumerate() {
                if *c {
                    r[k] = f_int[6 * s.node + k] - f_ext[6 * s.node + k];
                }
            }
            SupportReaction {
                node: s.node,
                label: s.label,
                kind: s.kind,
                reaction: r,
            }
        })
        .collect();

    let (force_imbalance, moment_imbalance) = imbalance(model, &reactions);
    let mut warnings = Vec::new();
    if condition > CONDITION_WARNING {
        warnings.push(format!("condition estimate {condition:.3e} exceeds {CONDITION_WARNING:.0e}"));
    }
    let displacements = (0..n_nodes)
        .map(|n| {
            let mut d = [0.0; 6];
            d.copy_from_slice(&u[6 * n..6 * n + 6]);
            d
        })
        .collect();
    Ok(AnalysisResult {
        displacements,
        reactions,
        element_axial: axial,
        diagnostics: Diagnostics {
            free_dofs: asm.n_free,
            residual,
            force_imbalance,
            moment_imbalance,
            condition_estimate: condition,
            warnings,
        },
    })
}

fn diagonal(m: &CscMatrix<f64>) -> Vec<f64> {
    let mut d = vec![0.0; m.ncols()];
    for (j, col) in (0..m.ncols()).map(|j| (j, m.col(j))) {
        for (r, v) in col.row_indices().iter().zip(col.values()) {
            if *r == j {
                d[j] += *v;
            }
        }
    }
    d
}

/// Relative global force and moment imbalance.
pub fn imbalance(model: &NetworkModel, reactions: &[SupportReaction]) -> (f64, f64) {
    let mut force = Vector3::zeros();
    let mut moment = Vector3::zeros();
    let mut scale = 0.0;
    let mut extent: f64 = 0.0;
    for n in &model.nodes {
        extent = extent.max(n.position.norm());
    }
    for l in &model.loads {
        let x = model.nodes[l.node].position;
        force += l.force;
        moment += x.cross(&l.force);
        scale += l.force.norm();
    }
    for r in reactions {
        let x = model.nodes[r.node].position;
        let f = Vector3::new(r.reaction[0], r.reaction[1], r.reaction[2]);
        let m = Vector3::new(r.reaction[3], r.reaction[4], r.reaction[5]);
        force += f;
        moment += x.cross(&f) + m;
    }
    if scale == 0.0 {
        return (force.norm(), moment.norm());
    }
    (force.norm() / scale, moment.norm() / (scale * extent.max(1.0)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub f_rob: [f64; 3],
    pub f_sup: f64,
    pub m_sup: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub f_avg: f64,
    pub t_max: f64,
    pub t_pct: f64,
    pub delta_max: f64,
    pub delta_avg: f64,
    pub delta_std: f64,
}

/// Which springing the base figures describe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseSide {
    /// Base nodes of the lowest-numbered brick (where construction starts).
    #[default]
    Start,
    /// Base nodes of the highest-numbered brick.
    End,
}

/// Summarises one analysis in the per-step table layout.
pub fn step_metrics(result: &AnalysisResult, model: &NetworkModel) -> StepMetrics {
    step_metrics_for(result, model, BaseSide::Start)
}

pub fn step_metrics_for(result: &AnalysisResult, model: &NetworkModel, side: BaseSide) -> StepMetrics {
    let mut m = StepMetrics::default();
    for r in &result.reactions {
        if let Some(i) = r.label.robot_index() {
            m.f_rob[i] += r.reaction[2];
        }
    }

    let base: Vec<&SupportReaction> = result.reactions.iter().filter(|r| r.kind == SupportKind::FixedBase).collect();
    let owner = |r: &SupportReaction| model.nodes[r.node].owner_bricks.iter().copied().min().unwrap_or(0);
    let pick = match side {
        BaseSide::Start => base.iter().map(|r| owner(r)).min(),
        BaseSide::End => base.iter().map(|r| owner(r)).max(),
    };
    if let Some(brick) = pick {
        let group: Vec<&&SupportReaction> = base.iter().filter(|r| owner(r) == brick).collect();
        let c = group
            .iter()
            .fold(Vector3::zeros(), |acc, r| acc + model.nodes[r.node].position)
            / group.len() as f64;
        let mut moment = Vector3::zeros();
        for r in &group {
            let f = Vector3::new(r.reaction[0], r.reaction[1], r.reaction[2]);
            let mm = Vector3::new(r.reaction[3], r.reaction[4], r.reaction[5]);
            moment += (model.nodes[r.node].position - c).cross(&f) + mm;
            m.f_sup += r.reaction[2];
        }
        m.m_sup = moment.norm();
    }

    let forces: Vec<f64> = model
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Connection)
        .map(|e| result.element_axial[e.id])
        .collect();
    if !forces.is_empty() {
        m.f_min = forces.iter().copied().fold(f64::INFINITY, f64::min);
        m.f_max = forces.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m.f_avg = forces.iter().sum::<f64>() / forces.len() as f64;
        m.t_max = m.f_max.max(0.0);
        m.t_pct = 100.0 * forces.iter().filter(|f| **f > 0.0).count() as f64 / forces.len() as f64;
    }

    let mags: Vec<f64> = (0..model.nodes.len()).map(|n| result.translation(n).norm() * 1e6).collect();
    if !mags.is_empty() {
        let count = mags.len() as f64;
        m.delta_max = mags.iter().copied().fold(0.0, f64::max);
        m.delta_avg = mags.iter().sum::<f64>() / count;
        let var = mags.iter().map(|d| (d - m.delta_avg).powi(2)).sum::<f64>() / count;
        m.delta_std = var.sqrt();
    }
    m
}

/// Off-centre couple estimate M = F·e.
pub fn twist_couple(force: f64, lever: f64) -> f64 {
    debug_assert!(lever >= 0.0, "lever arm must be non-negative");
    force * lever
}
