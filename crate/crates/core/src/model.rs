//! Bricks and their double-cross network representation.
//!
//! Every brick becomes two inner nodes on its long axis and six external
//! nodes (two per long side, one per short side). Rigid edges tie the
//! external nodes back to the inner ones. Neighbouring bricks share merged
//! external nodes and the rigid edges meeting there turn into spring
//! connections.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DIMS: [f64; 3] = [0.246, 0.116, 0.053];
pub const DEFAULT_DENSITY: f64 = 2420.0;
pub const DEFAULT_GRAVITY: f64 = 9.81;
pub const DEFAULT_TOLERANCE: f64 = 0.005;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub origin: Vector3<f64>,
    /// Columns are the local u (long), v (short) and w (thickness) axes.
    pub axes: Matrix3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            origin: Vector3::zeros(),
            axes: Matrix3::identity(),
        }
    }

    pub fn new(origin: Vector3<f64>, axes: Matrix3<f64>) -> Self {
        Pose { origin, axes }
    }

    pub fn from_rotation(origin: Vector3<f64>, rotation: &Rotation3<f64>) -> Self {
        Pose {
            origin,
            axes: *rotation.matrix(),
        }
    }

    pub fn axis(&self, k: usize) -> Vector3<f64> {
        self.axes.column(k).into_owned()
    }

    pub fn to_world(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.origin + self.axes * local
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Brick {
    pub id: usize,
    /// Length (u), width (v) and height (w) in metres.
    pub dims: Vector3<f64>,
    pub density: f64,
    pub pose: Pose,
    pub orientation: Orientation,
    /// Half extents used for node placement. Defaults to half the physical
    /// dimensions; generators stretch it to reach the neighbouring joints.
    #[serde(default)]
    pub node_half: Option<Vector3<f64>>,
}

impl Brick {
    pub fn new(id: usize, pose: Pose, orientation: Orientation) -> Self {
        Brick {
            id,
            dims: Vector3::from(DEFAULT_DIMS),
            density: DEFAULT_DENSITY,
            pose,
            orientation,
            node_half: None,
        }
    }

    pub fn with_dims(mut self, dims: Vector3<f64>) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn with_node_half(mut self, half: Vector3<f64>) -> Self {
        self.node_half = Some(half);
        self
    }

    pub fn volume(&self) -> f64 {
        self.dims.x * self.dims.y * self.dims.z
    }

    pub fn mass(&self) -> f64 {
        self.volume() * self.density
    }

    pub fn half_dims(&self) -> Vector3<f64> {
        self.dims * 0.5
    }

    pub fn node_half(&self) -> Vector3<f64> {
        self.node_half.unwrap_or_else(|| self.half_dims())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidBrick {
            id: self.id,
            reason: reason.to_string(),
        };
        if !self.dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(bad("dimensions must be strictly positive"));
        }
        if !(self.density.is_finite() && self.density >= 0.0) {
            return Err(bad("density must be non-negative"));
        }
        if let Some(h) = self.node_half {
            if !h.iter().all(|d| d.is_finite() && *d > 0.0) {
                return Err(bad("node extents must be strictly positive"));
            }
        }
        let ortho = self.pose.axes.transpose() * self.pose.axes - Matrix3::identity();
        if ortho.amax() > 1e-9 || self.pose.axes.determinant() < 0.0 {
            return Err(bad("pose axes must form a right-handed orthonormal frame"));
        }
        Ok(())
    }

    /// Local coordinates of the 8 network nodes: inner I0, I1 then external E0..E5.
    pub fn local_nodes(&self) -> [Vector3<f64>; 8] {
        let h = self.node_half();
        let q = h.x * 0.5;
        [
            Vector3::new(-q, 0.0, 0.0),
            Vector3::new(q, 0.0, 0.0),
            Vector3::new(-q, -h.y, 0.0),
            Vector3::new(q, -h.y, 0.0),
            Vector3::new(-q, h.y, 0.0),
            Vector3::new(q, h.y, 0.0),
            Vector3::new(-h.x, 0.0, 0.0),
            Vector3::new(h.x, 0.0, 0.0),
        ]
    }

    pub fn face_normal(&self, face: Face) -> Vector3<f64> {
        self.pose.axis(face.axis()) * face.sign()
    }

    /// Centre of the face on the node envelope.
    pub fn face_centre(&self, face: Face) -> Vector3<f64> {
        let h = self.node_half();
        self.pose.origin + self.face_normal(face) * h[face.axis()]
    }

    /// Physical area of a face.
    pub fn face_area(&self, face: Face) -> f64 {
        let (i, j) = face.in_plane();
        self.dims[i] * self.dims[j]
    }
}

/// The six faces of a brick, named by outward local axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    NegU,
    PosU,
    NegV,
    PosV,
    NegW,
    PosW,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::NegU,
        Face::PosU,
        Face::NegV,
        Face::PosV,
        Face::NegW,
        Face::PosW,
    ];

    pub fn axis(self) -> usize {
        match self {
            Face::NegU | Face::PosU => 0,
            Face::NegV | Face::PosV => 1,
            Face::NegW | Face::PosW => 2,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Face::NegU | Face::NegV | Face::NegW => -1.0,
            _ => 1.0,
        }
    }

    pub fn in_plane(self) -> (usize, usize) {
        match self.axis() {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    /// External node slots (0..6) lying on this face.
    pub fn external_slots(self) -> &'static [usize] {
        match self {
            Face::NegV => &[0, 1],
            Face::PosV => &[2, 3],
            Face::NegU => &[4],
            Face::PosU => &[5],
            Face::NegW | Face::PosW => &[],
        }
    }
}

/// Inner node each external slot hangs from.
pub const EXTERNAL_PARENT: [usize; 6] = [0, 1, 0, 1, 0, 1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Inner,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub position: Vector3<f64>,
    pub kind: NodeKind,
    pub owner_bricks: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    InternalRigid,
    ExternalRigid,
    Connection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    /// (inner node, far node). Element kinematics are referenced to the first.
    pub endpoints: (usize, usize),
    pub kind: EdgeKind,
    /// Tributary joint area for connections, m². Zero for rigid edges.
    pub section_area: f64,
    /// Multiplier on the joint springs. Two halves in series use 2.
    pub spring_factor: f64,
    pub brick: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JointSpec {
    /// kN/m³
    pub k_linear: f64,
    /// kN·m/rad per m² of joint
    pub k_rotational: f64,
    pub rigid_factor: f64,
}

impl Default for JointSpec {
    fn default() -> Self {
        JointSpec {
            k_linear: 100.0e6,
            k_rotational: 0.9e6,
            rigid_factor: 1.0e4,
        }
    }
}

impl JointSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k_linear", self.k_linear),
            ("k_rotational", self.k_rotational),
            ("rigid_factor", self.rigid_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be strictly positive")));
            }
        }
        Ok(())
    }

    /// Translational joint spring for a tributary area, N/m.
    pub fn translational(&self, area: f64) -> f64 {
        self.k_linear * area * 1e3
    }

    /// Rotational joint spring for a tributary area, N·m/rad.
    pub fn rotational(&self, area: f64) -> f64 {
        self.k_rotational * area * 1e3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupportKind {
    FixedBase,
    RobotGrip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SupportLabel {
    Base,
    Rob1,
    Rob2,
    Rob3,
}

impl SupportLabel {
    pub fn robot_index(self) -> Option<usize> {
        match self {
            SupportLabel::Base => None,
            SupportLabel::Rob1 => Some(0),
            SupportLabel::Rob2 => Some(1),
            SupportLabel::Rob3 => Some(2),
        }
    }

    pub fn robot(index: usize) -> SupportLabel {
        match index {
            0 => SupportLabel::Rob1,
            1 => SupportLabel::Rob2,
            _ => SupportLabel::Rob3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSpec {
    pub node: usize,
    pub kind: SupportKind,
    pub label: SupportLabel,
}

impl SupportSpec {
    pub fn constrained(&self) -> [bool; 6] {
        match self.kind {
            SupportKind::FixedBase => [true; 6],
            SupportKind::RobotGrip => [true, true, true, false, false, false],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub node: usize,
    pub force: Vector3<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrickEntry {
    pub brick: Brick,
    pub inner: [usize; 2],
    pub external: [usize; 6],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub tolerance: f64,
}

impl Default for Contact {
    fn default() -> Self {
        Contact {
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceInfo {
    pub a: usize,
    pub b: Option<usize>,
    pub area: f64,
    pub tributary_area: f64,
    pub joints: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub joint_spec: JointSpec,
    pub supports: Vec<SupportSpec>,
    pub loads: Vec<Load>,
    pub gravity: f64,
    pub bricks: Vec<BrickEntry>,
}

/// Single-brick network: 8 nodes, 7 rigid edges and self-weight at the inner nodes.
pub fn build_brick_graph(brick: &Brick, gravity: f64) -> Result<NetworkModel> {
    let mut model = NetworkModel::empty(JointSpec::default(), gravity);
    model.add_brick(brick.clone())?;
    Ok(model)
}

/// Joins two fragments and connects the last brick of `a` to the first brick of `b`.
pub fn connect_bricks(a: &NetworkModel, b: &NetworkModel, contact: &Contact) -> Result<NetworkModel> {
    let first = a
        .bricks
        .last()
        .ok_or_else(|| Error::InvalidModel("empty fragment".into()))?
        .brick
        .id;
    let second = b
        .bricks
        .first()
        .ok_or_else(|| Error::InvalidModel("empty fragment".into()))?
        .brick
        .id;
    if first == second {
        return Err(Error::SelfConnection(first));
    }
    let mut merged = a.clone();
    merged.append(b)?;
    merged.connect(first, second, contact)?;
    Ok(merged)
}

impl NetworkModel {
    pub fn empty(joint_spec: JointSpec, gravity: f64) -> Self {
        NetworkModel {
            nodes: Vec::new(),
            edges: Vec::new(),
            joint_spec,
            supports: Vec::new(),
            loads: Vec::new(),
            gravity,
            bricks: Vec::new(),
        }
    }

    pub fn brick_entry(&self, id: usize) -> Result<&BrickEntry> {
        self.bricks
            .iter()
            .find(|e| e.brick.id == id)
            .ok_or(Error::UnknownBrick(id))
    }

    fn brick_index(&self, id: usize) -> Result<usize> {
        self.bricks
            .iter()
            .position(|e| e.brick.id == id)
            .ok_or(Error::UnknownBrick(id))
    }

    pub fn add_brick(&mut self, brick: Brick) -> Result<usize> {
        brick.validate()?;
        if self.bricks.iter().any(|e| e.brick.id == brick.id) {
            return Err(Error::InvalidModel(format!("duplicate brick id {}", brick.id)));
        }
        let base = self.nodes.len();
        for (k, local) in brick.local_nodes().iter().enumerate() {
            self.nodes.push(Node {
                id: base + k,
                position: brick.pose.to_world(local),
                kind: if k < 2 { NodeKind::Inner } else { NodeKind::External },
                owner_bricks: vec![brick.id],
            });
        }
        let inner = [base, base + 1];
        let external = [base + 2, base + 3, base + 4, base + 5, base + 6, base + 7];
        self.push_edge((inner[0], inner[1]), EdgeKind::InternalRigid, 0.0, 1.0, brick.id);
        for (slot, &node) in external.iter().enumerate() {
            self.push_edge(
                (inner[EXTERNAL_PARENT[slot]], node),
                EdgeKind::ExternalRigid,
                0.0,
                1.0,
                brick.id,
            );
        }
        let half_weight = brick.mass() * self.gravity * 0.5;
        for &n in &inner {
            self.loads.push(Load {
                node: n,
                force: Vector3::new(0.0, 0.0, -half_weight),
            });
        }
        self.bricks.push(BrickEntry {
            brick,
            inner,
            external,
        });
        Ok(self.bricks.len() - 1)
    }

    fn push_edge(&mut self, endpoints: (usize, usize), kind: EdgeKind, area: f64, factor: f64, brick: usize) {
        let id = self.edges.len();
        self.edges.push(Edge {
            id,
            endpoints,
            kind,
            section_area: area,
            spring_factor: factor,
            brick,
        });
    }

    /// Appends another fragment, offsetting its ids.
    pub fn append(&mut self, other: &NetworkModel) -> Result<()> {
        for e in &other.bricks {
            if self.bricks.iter().any(|s| s.brick.id == e.brick.id) {
                return Err(Error::InvalidModel(format!("duplicate brick id {}", e.brick.id)));
            }
        }
        let off = self.nodes.len();
        let eoff = self.edges.len();
        for n in &other.nodes {
            let mut n = n.clone();
            n.id += off;
            self.nodes.push(n);
        }
        for e in &other.edges {
            let mut e = e.clone();
            e.id += eoff;
            e.endpoints = (e.endpoints.0 + off, e.endpoints.1 + off);
            self.edges.push(e);
        }
        for s in &other.supports {
            self.supports.push(SupportSpec {
                node: s.node + off,
                ..*s
            });
        }
        for l in &other.loads {
            self.loads.push(Load {
                node: l.node + off,
                force: l.force,
            });
        }
        for b in &other.bricks {
            let mut b = b.clone();
            b.inner = b.inner.map(|i| i + off);
            b.external = b.external.map(|i| i + off);
            self.bricks.push(b);
        }
        Ok(())
    }

    /// Connects two bricks of this model across their shared interface.
    pub fn connect(&mut self, a: usize, b: usize, contact: &Contact) -> Result<InterfaceInfo> {
        if a == b {
            return Err(Error::SelfConnection(a));
        }
        let ia = self.brick_index(a)?;
        let ib = self.brick_index(b)?;
        let ba = self.bricks[ia].brick.clone();
        let bb = self.bricks[ib].brick.clone();
        let iface = find_interface(&ba, &bb, contact.tolerance)?;

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for &sa in iface.face_a.external_slots() {
            for &sb in iface.face_b.external_slots() {
                let na = self.bricks[ia].external[sa];
                let nb = self.bricks[ib].external[sb];
                if na == nb {
                    continue;
                }
                let d = (self.nodes[na].position - self.nodes[nb].position).norm();
                if d <= contact.tolerance {
                    pairs.push((d, sa, sb));
                }
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut used_a = Vec::new();
        let mut used_b = Vec::new();
        let mut chosen = Vec::new();
        for (_, sa, sb) in pairs {
            if used_a.contains(&sa) || used_b.contains(&sb) {
                continue;
            }
            used_a.push(sa);
            used_b.push(sb);
            chosen.push((sa, sb));
        }

        if chosen.is_empty() {
            return self.connect_through_inner(ia, ib, iface.area);
        }

        let trib = iface.area / chosen.len() as f64;
        let mut joints = Vec::new();
        for (sa, sb) in chosen {
            let na = self.bricks[ia].external[sa];
            let nb = self.bricks[ib].external[sb];
            if self.nodes[na].owner_bricks.len() > 1 || self.nodes[nb].owner_bricks.len() > 1 {
                return Err(Error::InvalidModel(format!(
                    "joint node between bricks {a} and {b} is already shared"
                )));
            }
            let mid = (self.nodes[na].position + self.nodes[nb].position) * 0.5;
            self.nodes[na].position = mid;
            self.nodes[na].owner_bricks.push(b);
            self.redirect_node(nb, na);
            self.remove_node(nb);
            let joint = self.bricks[ia].external[sa];
            for e in self.edges.iter_mut() {
                if e.endpoints.1 == joint && e.kind == EdgeKind::ExternalRigid {
                    e.kind = EdgeKind::Connection;
                    e.section_area = trib;
                    e.spring_factor = 2.0;
                }
            }
            joints.push(joint);
        }
        Ok(InterfaceInfo {
            a,
            b: Some(b),
            area: iface.area,
            tributary_area: trib,
            joints,
        })
    }

    /// Fallback for faces without coincident slots (e.g. bed joints of flat
    /// stacked bricks): joints sit midway between paired inner nodes.
    fn connect_through_inner(&mut self, ia: usize, ib: usize, area: f64) -> Result<InterfaceInfo> {
        let a = self.bricks[ia].brick.id;
        let b = self.bricks[ib].brick.id;
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ka, &na) in self.bricks[ia].inner.iter().enumerate() {
            for (kb, &nb) in self.bricks[ib].inner.iter().enumerate() {
                let d = (self.nodes[na].position - self.nodes[nb].position).norm();
                pairs.push((d, ka, kb));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut chosen = Vec::new();
        for (_, ka, kb) in pairs {
            if chosen.iter().any(|&(x, y)| x == ka || y == kb) {
                continue;
            }
            chosen.push((ka, kb));
        }
        let trib = area / chosen.len() as f64;
        let mut joints = Vec::new();
        for (ka, kb) in chosen {
            let na = self.bricks[ia].inner[ka];
            let nb = self.bricks[ib].inner[kb];
            let id = self.nodes.len();
            self.nodes.push(Node {
                id,
                position: (self.nodes[na].position + self.nodes[nb].position) * 0.5,
                kind: NodeKind::External,
                owner_bricks: vec![a, b],
            });
            self.push_edge((na, id), EdgeKind::Connection, trib, 2.0, a);
            self.push_edge((nb, id), EdgeKind::Connection, trib, 2.0, b);
            joints.push(id);
        }
        Ok(InterfaceInfo {
            a,
            b: Some(b),
            area,
            tributary_area: trib,
            joints,
        })
    }

    /// Fixes the external nodes on one face of a brick to the ground through
    /// single-sided joint springs.
    pub fn attach_base(&mut self, brick: usize, face: Face) -> Result<InterfaceInfo> {
        let ib = self.brick_index(brick)?;
        let slots = face.external_slots();
        if slots.is_empty() {
            return Err(Error::InvalidModel(format!(
                "face {face:?} of brick {brick} carries no joint nodes"
            )));
        }
        let area = self.bricks[ib].brick.face_area(face);
        let trib = area / slots.len() as f64;
        let mut joints = Vec::new();
        for &s in slots {
            let node = self.bricks[ib].external[s];
            for e in self.edges.iter_mut() {
                if e.endpoints.1 == node && e.kind == EdgeKind::ExternalRigid && e.brick == brick {
                    e.kind = EdgeKind::Connection;
                    e.section_area = trib;
                    e.spring_factor = 1.0;
                }
            }
            self.add_support(node, SupportKind::FixedBase, SupportLabel::Base)?;
            joints.push(node);
        }
        Ok(InterfaceInfo {
            a: brick,
            b: None,
            area,
            tributary_area: trib,
            joints,
        })
    }

    pub fn add_support(&mut self, node: usize, kind: SupportKind, label: SupportLabel) -> Result<()> {
        if node >= self.nodes.len() {
            return Err(Error::InvalidModel(format!("support on unknown node {node}")));
        }
        if self.supports.iter().any(|s| s.node == node) {
            return Err(Error::InvalidModel(format!("node {node} already supported")));
        }
        self.supports.push(SupportSpec { node, kind, label });
        Ok(())
    }

    pub fn add_load(&mut self, node: usize, force: Vector3<f64>) -> Result<()> {
        if node >= self.nodes.len() {
            return Err(Error::InvalidModel(format!("load on unknown node {node}")));
        }
        self.loads.push(Load { node, force });
        Ok(())
    }

    fn redirect_node(&mut self, from: usize, to: usize) {
        for e in self.edges.iter_mut() {
            if e.endpoints.0 == from {
                e.endpoints.0 = to;
            }
            if e.endpoints.1 == from {
                e.endpoints.1 = to;
            }
        }
        for s in self.supports.iter_mut() {
            if s.node == from {
                s.node = to;
            }
        }
        for l in self.loads.iter_mut() {
            if l.node == from {
                l.node = to;
            }
        }
        for b in self.bricks.iter_mut() {
            for n in b.inner.iter_mut().chain(b.external.iter_mut()) {
                if *n == from {
                    *n = to;
                }
            }
        }
    }

    /// Removes an unreferenced node and closes the id gap.
    fn remove_node(&mut self, id: usize) {
        self.nodes.remove(id);
        let shift = |n: &mut usize| {
            if *n > id {
                *n -= 1;
            }
        };
        for (k, n) in self.nodes.iter_mut().enumerate() {
            n.id = k;
        }
        for e in self.edges.iter_mut() {
            shift(&mut e.endpoints.0);
            shift(&mut e.endpoints.1);
        }
        for s in self.supports.iter_mut() {
            shift(&mut s.node);
        }
        for l in self.loads.iter_mut() {
            shift(&mut l.node);
        }
        for b in self.bricks.iter_mut() {
            for n in b.inner.iter_mut().chain(b.external.iter_mut()) {
                shift(n);
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.bricks.iter().map(|b| b.brick.mass()).sum()
    }

    pub fn total_load(&self) -> Vector3<f64> {
        self.loads.iter().fold(Vector3::zeros(), |acc, l| acc + l.force)
    }

    pub fn count_edges(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    pub fn count_nodes(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Node id of a brick's external slot.
    pub fn external_node(&self, brick: usize, slot: usize) -> Result<usize> {
        Ok(self.brick_entry(brick)?.external[slot])
    }

    /// Removes robot supports, keeping base fixities.
    pub fn clear_grips(&mut self) {
        self.supports.retain(|s| s.kind == SupportKind::FixedBase);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceMatch {
    pub face_a: Face,
    pub face_b: Face,
    pub area: f64,
    pub gap: f64,
}

/// Finds the touching face pair between two bricks.
///
/// Faces touch when their outward normals are opposed and the node envelopes
/// are within `tol` of each other. The contact area is the overlap of the
/// physical face rectangles, taken as the smaller of the two projections.
pub fn find_interface(a: &Brick, b: &Brick, tol: f64) -> Result<FaceMatch> {
    if a.id == b.id {
        return Err(Error::SelfConnection(a.id));
    }
    let mut best: Option<FaceMatch> = None;
    let mut min_gap = f64::INFINITY;
    let mut touching = false;
    for fa in Face::ALL {
        let na = a.face_normal(fa);
        let ca = a.face_centre(fa);
        for fb in Face::ALL {
            let nb = b.face_normal(fb);
            if na.dot(&nb) > -0.8 {
                continue;
            }
            let cb = b.face_centre(fb);
            let gap = (cb - ca).dot(&na).abs();
            // each face projected on the other's plane; the smaller is order-independent
            let (Some(ab), Some(ba)) = (overlap_area(a, fa, b, fb), overlap_area(b, fb, a, fa)) else {
                continue;
            };
            let area = ab.min(ba);
            min_gap = min_gap.min(gap);
            if gap > tol {
                continue;
            }
            touching = true;
            let better = match best {
                None => true,
                Some(cur) => area > cur.area + 1e-12 || (area > cur.area - 1e-12 && gap < cur.gap),
            };
            if better {
                best = Some(FaceMatch {
                    face_a: fa,
                    face_b: fb,
                    area,
                    gap,
                });
            }
        }
    }
    match best {
        Some(m) if m.area > 1e-12 => Ok(m),
        Some(_) => Err(Error::ZeroArea { a: a.id, b: b.id }),
        None if touching => Err(Error::ZeroArea { a: a.id, b: b.id }),
        None => Err(Error::NotAdjacent {
            a: a.id,
            b: b.id,
            gap_mm: if min_gap.is_finite() { min_gap * 1e3 } else { f64::NAN },
        }),
    }
}

/// In-plane overlap of two faces; `None` when they are apart in the plane.
fn overlap_area(a: &Brick, fa: Face, b: &Brick, fb: Face) -> Option<f64> {
    let (i, j) = fa.in_plane();
    let ei = a.pose.axis(i);
    let ej = a.pose.axis(j);
    let ha = a.half_dims();
    let a_lo = [a.pose.origin.dot(&ei) - ha[i], a.pose.origin.dot(&ej) - ha[j]];
    let a_hi = [a.pose.origin.dot(&ei) + ha[i], a.pose.origin.dot(&ej) + ha[j]];

    let (p, q) = fb.in_plane();
    let hb = b.half_dims();
    let centre = b.face_centre(fb);
    let bp = b.pose.axis(p) * hb[p];
    let bq = b.pose.axis(q) * hb[q];
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for (sp, sq) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        let corner = centre + bp * sp + bq * sq;
        let c = [corner.dot(&ei), corner.dot(&ej)];
        for k in 0..2 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    let mut area = 1.0;
    for k in 0..2 {
        let w = a_hi[k].min(hi[k]) - a_lo[k].max(lo[k]);
        if w < -1e-9 {
            return None;
        }
        area *= w.max(0.0);
    }
    Some(area)
}
