//! Parametric arch and barrel-vault generators.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Brick, Contact, Face, JointSpec, NetworkModel, NodeKind, Orientation, Pose, DEFAULT_DENSITY,
    DEFAULT_DIMS, DEFAULT_GRAVITY,
};

const VAULT_TABLE: &str = include_str!("../data/vault_tests.csv");
const VAULT_STIFFNESS: &str = include_str!("../data/vault_stiffness.csv");

/// Orientation sequence of the arch rib.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// Vertical bricks at 1, 4, 7, ... with horizontal pairs in between.
    #[default]
    HerringboneHhv,
    AllHorizontal,
    AllVertical,
}

impl Pattern {
    pub fn orientation(self, index: usize) -> Orientation {
        match self {
            Pattern::HerringboneHhv if index % 3 == 1 => Orientation::Vertical,
            Pattern::HerringboneHhv | Pattern::AllHorizontal => Orientation::Horizontal,
            Pattern::AllVertical => Orientation::Vertical,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchConfig {
    pub span: f64,
    pub height: f64,
    pub n_bricks: usize,
    pub brick_dims: [f64; 3],
    pub density: f64,
    pub pattern: Pattern,
    /// Lateral offset of horizontal bricks from the rib centreline.
    pub stagger: f64,
    pub curve: CurveKind,
}

/// Centreline family selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// Circular segment up to a semicircle, stretched semicircle beyond.
    Circular,
    /// Hanging-chain curve through the springings and apex.
    #[default]
    Catenary,
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            span: 2.08,
            height: 1.93,
            n_bricks: 25,
            brick_dims: DEFAULT_DIMS,
            density: DEFAULT_DENSITY,
            pattern: Pattern::default(),
            stagger: DEFAULT_DIMS[0] / 4.0,
            curve: CurveKind::default(),
        }
    }
}

impl ArchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bricks == 0 {
            return Err(Error::Config("n_bricks must be at least 1".into()));
        }
        if !(self.span > 0.0 && self.span.is_finite()) {
            return Err(Error::Config(format!("span must be positive, got {}", self.span)));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::Config(format!("height must be positive, got {}", self.height)));
        }
        if self.brick_dims.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config("brick dimensions must be positive".into()));
        }
        if !(self.density >= 0.0) {
            return Err(Error::Config("density must be non-negative".into()));
        }
        Ok(())
    }

    /// Low-rise arch of `n` default bricks, for small test builds where the
    /// default rise would bend the rib too sharply.
    pub fn shallow(n: usize) -> Self {
        let span = 0.155 * n as f64;
        ArchConfig {
            span,
            height: 0.1 * span,
            n_bricks: n,
            ..ArchConfig::default()
        }
    }

    /// 1-based index of the crown brick.
    pub fn crown_index(&self) -> usize {
        self.n_bricks.div_ceil(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CurveFamily {
    /// Circular segment of the given radius.
    Circular { radius: f64, half_angle: f64 },
    /// Semicircle of radius span/2 scaled vertically to the target height.
    Stretched { half_span: f64, height: f64 },
    /// z = height − c (cosh((x − span/2)/c) − 1).
    Catenary { parameter: f64 },
}

const GAUSS_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GAUSS_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];
const PANELS: usize = 512;

/// Planar arch centreline in the x-z plane, parameterised by arc length from
/// the left springing at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    pub span: f64,
    pub height: f64,
    pub family: CurveFamily,
    length: f64,
    /// Cumulative arc length at panel boundaries (stretched family only).
    #[serde(skip)]
    table: Vec<f64>,
}

pub fn arch_centerline(config: &ArchConfig) -> Result<Centerline> {
    config.validate()?;
    match config.curve {
        CurveKind::Circular => Centerline::new(config.span, config.height),
        CurveKind::Catenary => Centerline::catenary(config.span, config.height),
    }
}

impl Centerline {
    pub fn new(span: f64, height: f64) -> Result<Self> {
        if !(span > 0.0 && height > 0.0 && span.is_finite() && height.is_finite()) {
            return Err(Error::Config(format!(
                "span {span} and height {height} must both be positive"
            )));
        }
        let a = span / 2.0;
        if height <= a {
            let radius = (a * a + height * height) / (2.0 * height);
            let half_angle = (a / radius).clamp(-1.0, 1.0).asin();
            return Ok(Centerline {
                span,
                height,
                family: CurveFamily::Circular { radius, half_angle },
                length: 2.0 * radius * half_angle,
                table: Vec::new(),
            });
        }
        let family = CurveFamily::Stretched { half_span: a, height };
        let mut c = Centerline {
            span,
            height,
            family,
            length: 0.0,
            table: vec![0.0; PANELS + 1],
        };
        let h = std::f64::consts::PI / PANELS as f64;
        for k in 0..PANELS {
            let lo = k as f64 * h;
            c.table[k + 1] = c.table[k] + c.speed_integral(lo, lo + h);
        }
        c.length = c.table[PANELS];
        Ok(c)
    }

    pub fn catenary(span: f64, height: f64) -> Result<Self> {
        if !(span > 0.0 && height > 0.0 && span.is_finite() && height.is_finite()) {
            return Err(Error::Config(format!(
                "span {span} and height {height} must both be positive"
            )));
        }
        let a = span / 2.0;
        // (cosh u − 1)/u grows monotonically from 0, so bisect on u = a/c.
        let target = height / a;
        let f = |u: f64| (u.cosh() - 1.0) / u - target;
        let (mut lo, mut hi) = (1e-9, 1.0);
        while f(hi) < 0.0 {
            hi *= 2.0;
            if hi > 700.0 {
                return Err(Error::Config(format!("rise/span ratio {} too large", height / span)));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = a / (0.5 * (lo + hi));
        Ok(Centerline {
            span,
            height,
            family: CurveFamily::Catenary { parameter: c },
            length: 2.0 * c * (a / c).sinh(),
            table: Vec::new(),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn speed(&self, phi: f64) -> f64 {
        match self.family {
            CurveFamily::Circular { radius, half_angle } => radius * 2.0 * half_angle,
            CurveFamily::Catenary { .. } => self.length,
            CurveFamily::Stretched { half_span, height } => {
                (half_span * phi.sin()).hypot(height * phi.cos())
            }
        }
    }

    fn speed_integral(&self, lo: f64, hi: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        GAUSS_X
            .iter()
            .zip(GAUSS_W.iter())
            .map(|(x, w)| w * self.speed(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Curve point and unit tangent at native parameter `phi`.
    fn eval(&self, phi: f64) -> (Vector3<f64>, Vector3<f64>) {
        match self.family {
            CurveFamily::Circular { radius, half_angle } => {
                let theta = -half_angle + 2.0 * half_angle * phi;
                let a = self.span / 2.0;
                let p = Vector3::new(a + radius * theta.sin(), 0.0, self.height - radius + radius * theta.cos());
                let t = Vector3::new(theta.cos(), 0.0, -theta.sin());
                (p, t)
            }
            CurveFamily::Catenary { parameter: c } => {
                let a = self.span / 2.0;
                let sinh_a = (a / c).sinh();
                let x = a + c * (phi * self.length / c - sinh_a).asinh();
                let z = self.height - c * (((x - a) / c).cosh() - 1.0);
                let t = Vector3::new(1.0, 0.0, -((x - a) / c).sinh()).normalize();
                (Vector3::new(x, 0.0, z), t)
            }
            CurveFamily::Stretched { half_span, height } => {
                let p = Vector3::new(half_span * (1.0 - phi.cos()), 0.0, height * phi.sin());
                let t = Vector3::new(half_span * phi.sin(), 0.0, height * phi.cos()).normalize();
                (p, t)
            }
        }
    }

    /// Native parameter at arc length `s` (clamped to the curve).
    fn param(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length);
        match self.family {
            CurveFamily::Circular { .. } | CurveFamily::Catenary { .. } => s / self.length,
            CurveFamily::Stretched { .. } => {
                let h = std::f64::consts::PI / PANELS as f64;
                let k = match self.table.binary_search_by(|v| v.total_cmp(&s)) {
                    Ok(k) => return k as f64 * h,
                    Err(k) => k.saturating_sub(1).min(PANELS - 1),
                };
                let lo = k as f64 * h;
                let mut phi = lo + h * (s - self.table[k]) / (self.table[k + 1] - self.table[k]);
                for _ in 0..30 {
                    let f = self.table[k] + self.speed_integral(lo, phi) - s;
                    let step = f / self.speed(phi);
                    phi -= step;
                    if step.abs() < 1e-15 {
                        break;
                    }
                }
                phi
            }
        }
    }

    /// Point at arc length `s`; beyond the ends the curve continues along its
    /// end tangent.
    pub fn point(&self, s: f64) -> Vector3<f64> {
        let (p, t) = self.eval(self.param(s));
        if s < 0.0 {
            p + t * s
        } else if s > self.length {
            p + t * (s - self.length)
        } else {
            p
        }
    }

    pub fn tangent(&self, s: f64) -> Vector3<f64> {
        self.eval(self.param(s)).1
    }

    /// In-plane unit normal pointing away from the arch interior.
    pub fn normal(&self, s: f64) -> Vector3<f64> {
        let t = self.tangent(s);
        Vector3::new(-t.z, 0.0, t.x)
    }

    /// Apex point at mid arc length.
    pub fn apex(&self) -> Vector3<f64> {
        self.point(self.length / 2.0)
    }
}

/// A placed arch rib: bricks in sequence along the centreline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArchLayout {
    pub config: ArchConfig,
    pub centerline: Centerline,
    pub pitch: f64,
    pub bricks: Vec<Brick>,
}

/// Places the rib bricks at equal arc-length stations.
///
/// Node envelopes are stretched along the tangent to the station pitch so that
/// consecutive contact nodes meet; mass and contact areas keep the physical
/// brick dimensions.
pub fn place_arch_bricks(config: &ArchConfig) -> Result<ArchLayout> {
    let centerline = arch_centerline(config)?;
    let n = config.n_bricks;
    let [l, w, h] = config.brick_dims;
    let pitch = if n > 1 { centerline.length() / (n - 1) as f64 } else { l };
    let mut bricks = Vec::with_capacity(n);
    for i in 1..=n {
        let s = (i - 1) as f64 * pitch;
        let t = centerline.tangent(s);
        let nrm = centerline.normal(s);
        let lat = Vector3::y();
        let base = centerline.point(s);
        let orientation = config.pattern.orientation(i);
        let brick = match orientation {
            Orientation::Horizontal => {
                let shift = match i % 3 {
                    2 => -config.stagger,
                    0 => config.stagger,
                    _ => 0.0,
                };
                let shift = if config.pattern == Pattern::HerringboneHhv { shift } else { 0.0 };
                let axes = Matrix3::from_columns(&[lat, t, lat.cross(&t)]);
                Brick::new(i, Pose::new(base + lat * shift, axes), orientation)
                    .with_dims(Vector3::new(l, w, h))
                    .with_node_half(Vector3::new(l / 2.0, pitch / 2.0, h / 2.0))
            }
            Orientation::Vertical => {
                let axes = Matrix3::from_columns(&[t, nrm, t.cross(&nrm)]);
                Brick::new(i, Pose::new(base, axes), orientation)
                    .with_dims(Vector3::new(l, w, h))
                    .with_node_half(Vector3::new(pitch / 2.0, w / 2.0, h / 2.0))
            }
        }
        .with_density(config.density);
        brick.validate()?;
        bricks.push(brick);
    }
    for pair in bricks.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let lead = a.pose.to_world(&leading_face_centre(a));
        let trail = b.pose.to_world(&-leading_face_centre(b));
        let overlap = (lead - trail).dot(&a.pose.axis(tangent_axis(a)));
        if overlap > Contact::default().tolerance {
            return Err(Error::InvalidModel(format!(
                "bricks {} and {} overlap by {:.1} mm",
                a.id,
                b.id,
                overlap * 1e3
            )));
        }
    }
    Ok(ArchLayout {
        config: config.clone(),
        centerline,
        pitch,
        bricks,
    })
}

fn tangent_axis(b: &Brick) -> usize {
    match b.orientation {
        Orientation::Horizontal => 1,
        Orientation::Vertical => 0,
    }
}

fn leading_face_centre(b: &Brick) -> Vector3<f64> {
    let mut v = Vector3::zeros();
    let k = tangent_axis(b);
    v[k] = b.node_half()[k];
    v
}

/// Face of a rib brick pointing back towards the start of the arch.
pub fn trailing_face(b: &Brick) -> Face {
    match b.orientation {
        Orientation::Horizontal => Face::NegV,
        Orientation::Vertical => Face::NegU,
    }
}

/// Face of a rib brick pointing towards the end of the arch.
pub fn leading_face(b: &Brick) -> Face {
    match b.orientation {
        Orientation::Horizontal => Face::PosV,
        Orientation::Vertical => Face::PosU,
    }
}

/// External slot used as robot grip `slot` (0 or 1) on a rib brick.
pub fn grip_slot(b: &Brick, slot: usize) -> usize {
    match (b.orientation, slot) {
        (Orientation::Horizontal, 0) => 2,
        (Orientation::Vertical, 0) => 1,
        _ => 3,
    }
}

impl ArchLayout {
    pub fn n_bricks(&self) -> usize {
        self.bricks.len()
    }

    pub fn brick(&self, index: usize) -> Result<&Brick> {
        index
            .checked_sub(1)
            .and_then(|k| self.bricks.get(k))
            .ok_or(Error::UnknownBrick(index))
    }

    /// Network of the first `placed` bricks with base fixity at the start
    /// springing, and at the far springing once the rib is closed.
    pub fn network(&self, placed: usize, joint: JointSpec, gravity: f64) -> Result<NetworkModel> {
        if placed == 0 || placed > self.bricks.len() {
            return Err(Error::InvalidModel(format!(
                "cannot build {placed} of {} bricks",
                self.bricks.len()
            )));
        }
        joint.validate()?;
        let contact = Contact::default();
        let mut model = NetworkModel::empty(joint, gravity);
        for (k, brick) in self.bricks[..placed].iter().enumerate() {
            model.add_brick(brick.clone())?;
            if k == 0 {
                model.attach_base(brick.id, trailing_face(brick))?;
            } else {
                model.connect(self.bricks[k - 1].id, brick.id, &contact)?;
            }
        }
        if placed == self.bricks.len() {
            let last = &self.bricks[placed - 1];
            model.attach_base(last.id, leading_face(last))?;
        }
        Ok(model)
    }

    /// Node id of a brick's grip slot in a network built by [`Self::network`].
    pub fn grip_node(&self, model: &NetworkModel, brick: usize, slot: usize) -> Result<usize> {
        let b = self.brick(brick)?;
        model.external_node(brick, grip_slot(b, slot))
    }

    /// Both designated grip nodes of a brick.
    pub fn designated_nodes(&self, model: &NetworkModel, brick: usize) -> Result<[usize; 2]> {
        Ok([self.grip_node(model, brick, 0)?, self.grip_node(model, brick, 1)?])
    }

    pub fn total_weight(&self, gravity: f64) -> f64 {
        self.bricks.iter().map(|b| b.mass() * gravity).sum()
    }
}

/// Parameters of one full-scale barrel-vault load test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaultTestSpec {
    pub id: usize,
    #[serde(rename = "L")]
    pub span: f64,
    #[serde(rename = "r")]
    pub rise: f64,
    #[serde(rename = "b")]
    pub width: f64,
    /// Ring thickness in mm.
    #[serde(rename = "t")]
    pub thickness_mm: f64,
    #[serde(rename = "bricks")]
    pub n_bricks: usize,
    /// Fill depth above the crown in mm.
    #[serde(rename = "h")]
    pub fill_mm: f64,
    pub gamma_f: f64,
    pub gamma_m: f64,
    /// Horizontal distance of the live load from the left springing.
    #[serde(rename = "x")]
    pub load_x: f64,
}

impl VaultTestSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.span, self.rise, self.width, self.thickness_mm, self.load_x];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.n_bricks == 0 {
            return Err(Error::Config(format!("test {}: parameters must be positive", self.id)));
        }
        if self.fill_mm < 0.0 || self.gamma_f < 0.0 || self.gamma_m < 0.0 {
            return Err(Error::Config(format!("test {}: negative fill or density", self.id)));
        }
        if self.load_x >= self.span {
            return Err(Error::Config(format!("test {}: load position beyond span", self.id)));
        }
        if self.rise > self.span / 2.0 + 1e-12 {
            return Err(Error::Config(format!(
                "test {}: rise {} exceeds half span {}",
                self.id,
                self.rise,
                self.span / 2.0
            )));
        }
        Ok(())
    }

    pub fn thickness(&self) -> f64 {
        self.thickness_mm * 1e-3
    }
}

pub fn parse_vault_specs(text: &str) -> Result<Vec<VaultTestSpec>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let specs = rdr.deserialize().collect::<std::result::Result<Vec<VaultTestSpec>, _>>()?;
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

/// The eight bundled load tests.
pub fn vault_test_specs() -> Vec<VaultTestSpec> {
    parse_vault_specs(VAULT_TABLE).expect("bundled vault table is valid")
}

/// Measured initial secant stiffness (kN/mm) for each bundled test.
pub fn experimental_stiffness() -> Vec<(usize, f64)> {
    #[derive(Deserialize)]
    struct Row {
        id: usize,
        k_e: f64,
    }
    csv::Reader::from_reader(VAULT_STIFFNESS.as_bytes())
        .deserialize::<Row>()
        .map(|r| r.map(|r| (r.id, r.k_e)).expect("bundled stiffness table is valid"))
        .collect()
}

/// Vault network with its live-load node.
#[derive(Clone, Debug)]
pub struct VaultModel {
    pub spec: VaultTestSpec,
    pub network: NetworkModel,
    pub load_node: usize,
    /// Fill dead load per voussoir in N.
    pub fill_loads: Vec<f64>,
}

/// Segmental ring of voussoirs with fill dead load and fixed springings.
/// Span and rise are taken at the intrados.
pub fn build_barrel_vault(spec: &VaultTestSpec, joint: JointSpec) -> Result<VaultModel> {
    spec.validate()?;
    joint.validate()?;
    let g = DEFAULT_GRAVITY;
    let t = spec.thickness();
    let a = spec.span / 2.0;
    let r_in = (a * a + spec.rise * spec.rise) / (2.0 * spec.rise);
    let half_angle = (a / r_in).clamp(-1.0, 1.0).asin();
    let r_c = r_in + t / 2.0;
    let r_ext = r_in + t;
    let centre = Vector3::new(a, 0.0, spec.rise - r_in);
    let n = spec.n_bricks;
    let dtheta = 2.0 * half_angle / n as f64;
    let pitch = r_c * dtheta;
    let fill_top = centre.z + r_ext + spec.fill_mm * 1e-3;

    let contact = Contact::default();
    let mut model = NetworkModel::empty(joint, g);
    let mut fill_loads = Vec::with_capacity(n);
    for i in 1..=n {
        let theta = -half_angle + (i as f64 - 0.5) * dtheta;
        let radial = Vector3::new(theta.sin(), 0.0, theta.cos());
        let tangent = Vector3::new(theta.cos(), 0.0, -theta.sin());
        let axes = Matrix3::from_columns(&[radial, tangent, radial.cross(&tangent)]);
        let brick = Brick::new(i, Pose::new(centre + radial * r_c, axes), Orientation::Horizontal)
            .with_dims(Vector3::new(t, pitch, spec.width))
            .with_density(spec.gamma_m);
        model.add_brick(brick)?;
        if i == 1 {
            model.attach_base(i, Face::NegV)?;
        } else {
            model.connect(i - 1, i, &contact)?;
        }

        let x_lo = r_ext * (theta - dtheta / 2.0).sin();
        let x_hi = r_ext * (theta + dtheta / 2.0).sin();
        let plan = (x_hi - x_lo).abs();
        let column = (fill_top - (centre.z + r_ext * theta.cos())).max(0.0);
        let weight = if spec.fill_mm > 0.0 { spec.gamma_f * g * column * plan * spec.width } else { 0.0 };
        let inner = model.brick_entry(i)?.inner;
        for node in inner {
            model.add_load(node, Vector3::new(0.0, 0.0, -weight / 2.0))?;
        }
        fill_loads.push(weight);
    }
    model.attach_base(n, Face::PosV)?;

    // Outer joint nodes lie on the extrados side of the ring centreline.
    let target = spec.load_x;
    let load_node = model
        .nodes
        .iter()
        .filter(|nd| nd.kind == NodeKind::External && nd.owner_bricks.len() == 2)
        .filter(|nd| (nd.position - centre).norm() > r_c)
        .min_by(|p, q| {
            let dp = (p.position.x - target).abs();
            let dq = (q.position.x - target).abs();
            dp.total_cmp(&dq).then(p.id.cmp(&q.id))
        })
        .map(|nd| nd.id)
        .ok_or_else(|| Error::InvalidModel(format!("test {}: no joint nodes", spec.id)))?;

    Ok(VaultModel {
        spec: spec.clone(),
        network: model,
        load_node,
        fill_loads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EdgeKind;

    #[test]
    fn rise_of_half_span_is_a_semicircle() {
        let c = Centerline::new(2.08, 1.04).unwrap();
        match c.family {
            CurveFamily::Circular { radius, half_angle } => {
                assert!((radius - 1.04).abs() < 1e-12);
                assert!((half_angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
            }
            other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn default_apex_and_endpoints() {
        let c = arch_centerline(&ArchConfig::default()).unwrap();
        let apex = c.apex();
        assert!((apex.x - 1.04).abs() < 1e-9 && (apex.z - 1.93).abs() < 1e-9);
        assert!(c.point(0.0).norm() < 1e-12);
        assert!((c.point(c.length()) - Vector3::new(2.08, 0.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn length_matches_dense_polyline() {
        let c = Centerline::new(2.08, 1.93).unwrap();
        let m = 1_000_000;
        let mut prev = Vector3::new(0.0, 0.0, 0.0);
        let mut total = 0.0;
        for k in 1..=m {
            let phi = std::f64::consts::PI * k as f64 / m as f64;
            let p = Vector3::new(1.04 * (1.0 - phi.cos()), 0.0, 1.93 * phi.sin());
            total += (p - prev).norm();
            prev = p;
        }
        assert!(((c.length() - total) / total).abs() < 1e-6);
    }

    #[test]
    fn catenary_length_matches_dense_polyline() {
        let c = Centerline::catenary(2.08, 1.93).unwrap();
        let CurveFamily::Catenary { parameter } = c.family else {
            panic!("expected catenary");
        };
        let z = |x: f64| 1.93 - parameter * (((x - 1.04) / parameter).cosh() - 1.0);
        assert!(z(0.0).abs() < 1e-9 && z(2.08).abs() < 1e-9);
        let m = 1_000_000;
        let mut total = 0.0;
        for k in 0..m {
            let (x0, x1) = (2.08 * k as f64 / m as f64, 2.08 * (k + 1) as f64 / m as f64);
            total += (x1 - x0).hypot(z(x1) - z(x0));
        }
        assert!(((c.length() - total) / total).abs() < 1e-6);
        let mid = c.point(c.length() * 0.3);
        assert!((mid.z - z(mid.x)).abs() < 1e-9);
    }

    #[test]
    fn arc_length_inverse_round_trips() {
        let c = Centerline::new(2.08, 1.93).unwrap();
        let (mut prev, mut acc) = (c.point(0.0), 0.0);
        for k in 1..=2000 {
            let p = c.point(c.length() * k as f64 / 2000.0);
            acc += (p - prev).norm();
            prev = p;
        }
        assert!((acc - c.length()).abs() < 1e-5);
    }

    #[test]
    fn rejects_non_positive_dimensions() {
        assert!(Centerline::new(0.0, 1.0).is_err());
        let cfg = ArchConfig { height: -1.0, ..ArchConfig::default() };
        assert!(arch_centerline(&cfg).is_err());
    }

    #[test]
    fn crown_brick_is_highest() {
        let layout = place_arch_bricks(&ArchConfig::default()).unwrap();
        assert_eq!(layout.n_bricks(), 25);
        let top = layout
            .bricks
            .iter()
            .max_by(|a, b| a.pose.origin.z.total_cmp(&b.pose.origin.z))
            .unwrap();
        assert_eq!(top.id, 13);
        assert_eq!(layout.config.crown_index(), 13);
        for b in &layout.bricks {
            let vertical = b.id % 3 == 1;
            assert_eq!(b.orientation == Orientation::Vertical, vertical, "brick {}", b.id);
        }
    }

    #[test]
    fn single_brick_sits_at_springing() {
        let cfg = ArchConfig { n_bricks: 1, ..ArchConfig::default() };
        let layout = place_arch_bricks(&cfg).unwrap();
        assert_eq!(layout.n_bricks(), 1);
        assert!(layout.bricks[0].pose.origin.norm() < 1e-12);
    }

    #[test]
    fn every_interface_is_detected_with_positive_area() {
        let layout = place_arch_bricks(&ArchConfig::default()).unwrap();
        let tol = Contact::default().tolerance;
        for pair in layout.bricks.windows(2) {
            let m = crate::model::find_interface(&pair[0], &pair[1], tol).unwrap();
            assert!(m.area > 0.0);
            assert_eq!(m.face_a, leading_face(&pair[0]));
            assert_eq!(m.face_b, trailing_face(&pair[1]));
        }
        let model = layout.network(25, JointSpec::default(), DEFAULT_GRAVITY).unwrap();
        assert_eq!(model.nodes.len(), 8 * 25 - 24);
        // one merged joint per interface plus the two base faces
        assert_eq!(model.count_edges(EdgeKind::Connection), 2 * 24 + 2);
    }

    #[test]
    fn self_weight_of_default_arch() {
        let layout = place_arch_bricks(&ArchConfig::default()).unwrap();
        let w = layout.total_weight(DEFAULT_GRAVITY);
        assert!((w - 897.5).abs() < 0.5, "weight {w}");
    }

    #[test]
    fn bundled_table_has_eight_rows() {
        let specs = vault_test_specs();
        assert_eq!(specs.len(), 8);
        assert_eq!(specs[0].n_bricks, 46);
        assert_eq!(experimental_stiffness().len(), 8);
    }

    #[test]
    fn vault_one_is_semicircular() {
        let spec = &vault_test_specs()[0];
        let v = build_barrel_vault(spec, JointSpec::default()).unwrap();
        assert_eq!(v.network.bricks.len(), 46);
        let first = &v.network.bricks[0].brick;
        assert!(first.pose.axis(1).z > 0.99);
    }

    #[test]
    fn zero_fill_height_gives_no_fill_load() {
        let mut spec = vault_test_specs()[1].clone();
        spec.fill_mm = 0.0;
        spec.gamma_f = 9999.0;
        let v = build_barrel_vault(&spec, JointSpec::default()).unwrap();
        assert!(v.fill_loads.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn midspan_load_in_vault_seven() {
        let spec = &vault_test_specs()[6];
        let v = build_barrel_vault(spec, JointSpec::default()).unwrap();
        let p = v.network.nodes[v.load_node].position;
        assert!((p.x - spec.span / 2.0).abs() < 1e-9, "load at x = {}", p.x);
    }

    #[test]
    fn rejects_rise_above_half_span() {
        let mut spec = vault_test_specs()[0].clone();
        spec.rise = spec.span;
        assert!(build_barrel_vault(&spec, JointSpec::default()).is_err());
    }
}
