use nalgebra::Vector3;

use masonry_core::model::NetworkModel;
use masonry_core::solver::{solve_static, AnalysisResult};

/// Σ loads + Σ reactions, forces and moments about the origin, relative to
/// the total applied load.
pub fn residual(model: &NetworkModel, result: &AnalysisResult) -> f64 {
    let mut f = Vector3::zeros();
    let mut m = Vector3::zeros();
    let mut scale = 0.0;
    let mut lever = 0.0f64;
    for l in &model.loads {
        let p = model.nodes[l.node].position;
        f += l.force;
        m += p.cross(&l.force);
        scale += l.force.norm();
        lever = lever.max(p.norm());
    }
    for r in &result.reactions {
        let p = model.nodes[r.node].position;
        let rf = Vector3::new(r.reaction[0], r.reaction[1], r.reaction[2]);
        f += rf;
        m += p.cross(&rf) + Vector3::new(r.reaction[3], r.reaction[4], r.reaction[5]);
    }
    (f.norm() / scale).max(m.norm() / (scale * lever.max(1.0)))
}

fn nearest(model: &NetworkModel, p: Vector3<f64>) -> (usize, f64) {
    model
        .nodes
        .iter()
        .map(|n| (n.id, (n.position - p).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// Worst deviation from the half-turn image (x → span − x, y → −y),
/// relative to the largest translation. Infinite if a node has no image.
pub fn half_turn_asymmetry(model: &NetworkModel, span: f64) -> f64 {
    let result = solve_static(model).unwrap();
    let scale = (0..model.nodes.len())
        .map(|i| result.translation(i).norm())
        .fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for node in &model.nodes {
        let p = node.position;
        let (twin, dist) = nearest(model, Vector3::new(span - p.x, -p.y, p.z));
        if dist > 1e-6 {
            return f64::INFINITY;
        }
        let u = result.translation(node.id);
        let mirrored = Vector3::new(-u.x, -u.y, u.z);
        worst = worst.max((mirrored - result.translation(twin)).norm() / scale);
    }
    worst
}

/// `base` with its loads replaced by point loads and no self-weight.
pub fn loaded(base: &NetworkModel, loads: &[(usize, [f64; 3])]) -> NetworkModel {
    let mut m = base.clone();
    m.loads.clear();
    m.gravity = 0.0;
    for (node, f) in loads {
        m.add_load(*node % m.nodes.len(), Vector3::from(*f)).unwrap();
    }
    m
}

/// Max |u(a+b) − u(a) − u(b)| relative to the largest displacement component.
pub fn superposition_error(base: &NetworkModel, a: &[(usize, [f64; 3])], b: &[(usize, [f64; 3])]) -> f64 {
    let both: Vec<_> = a.iter().chain(b).cloned().collect();
    let ua = solve_static(&loaded(base, a)).unwrap();
    let ub = solve_static(&loaded(base, b)).unwrap();
    let uab = solve_static(&loaded(base, &both)).unwrap();
    let scale = uab
        .displacements
        .iter()
        .chain(&ua.displacements)
        .chain(&ub.displacements)
        .flat_map(|d| d.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for i in 0..base.nodes.len() {
        for k in 0..6 {
            let sum = ua.displacements[i][k] + ub.displacements[i][k];
            worst = worst.max((uab.displacements[i][k] - sum).abs() / scale);
        }
    }
    worst
}
