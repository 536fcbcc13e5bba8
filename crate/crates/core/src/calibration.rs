//! Joint stiffness calibration against barrel-vault load tests.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_barrel_vault, experimental_stiffness, VaultTestSpec};
use crate::model::{JointSpec, NetworkModel};
use crate::solver::solve_static;

/// Probe load used for secant stiffness, in N.
pub const PROBE_LOAD: f64 = 1.0e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub test: usize,
    /// Measured stiffness, kN/mm.
    pub k_e: f64,
    /// Model stiffness, kN/mm. `None` if the analysis failed.
    pub k_m: Option<f64>,
    /// 100 (k_m − k_e) / k_e.
    pub e_rel: Option<f64>,
    pub error: Option<String>,
}

impl CalibrationRecord {
    pub fn failed(&self) -> bool {
        self.k_m.is_none()
    }
}

/// Load-over-deflection at `load_node` for a downward point load `p` (N),
/// with self-weight and any existing loads removed. Returns kN/mm.
pub fn secant_stiffness(model: &NetworkModel, load_node: usize, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Config(format!("probe load must be positive, got {p}")));
    }
    let mut probe = model.clone();
    probe.gravity = 0.0;
    probe.loads.clear();
    probe.add_load(load_node, Vector3::new(0.0, 0.0, -p))?;
    let result = solve_static(&probe)?;
    let deflection = -result.translation(load_node).z;
    if deflection.abs() < f64::MIN_POSITIVE || !deflection.is_finite() {
        return Err(Error::InvalidModel(format!(
            "zero deflection at node {load_node}; model may be over-constrained"
        )));
    }
    Ok(p / deflection * 1e-6)
}

fn calibrate_one(spec: &VaultTestSpec, k_e: f64, joint: JointSpec) -> CalibrationRecord {
    let outcome = build_barrel_vault(spec, joint)
        .and_then(|v| secant_stiffness(&v.network, v.load_node, PROBE_LOAD));
    match outcome {
        Ok(k_m) => CalibrationRecord {
            test: spec.id,
            k_e,
            k_m: Some(k_m),
            e_rel: Some(100.0 * (k_m - k_e) / k_e),
            error: None,
        },
        Err(e) => CalibrationRecord {
            test: spec.id,
            k_e,
            k_m: None,
            e_rel: None,
            error: Some(e.to_string()),
        },
    }
}

/// Analyses every test with one joint spec. Failed tests are kept as marked rows.
pub fn run_calibration_suite(
    specs: &[VaultTestSpec],
    measured: &[(usize, f64)],
    joint: JointSpec,
) -> Result<Vec<CalibrationRecord>> {
    joint.validate()?;
    let paired = specs
        .iter()
        .map(|s| {
            measured
                .iter()
                .find(|(id, _)| *id == s.id)
                .map(|(_, k)| (s, *k))
                .ok_or_else(|| Error::Config(format!("no measured stiffness for test {}", s.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(paired.into_par_iter().map(|(s, k)| calibrate_one(s, k, joint)).collect())
}

/// The bundled suite with the bundled measurements.
pub fn default_suite(joint: JointSpec) -> Result<Vec<CalibrationRecord>> {
    run_calibration_suite(&crate::geometry::vault_test_specs(), &experimental_stiffness(), joint)
}

/// Mean |e_rel| over successful rows; `None` if every row failed.
pub fn mean_abs_error(records: &[CalibrationRecord]) -> Option<f64> {
    let errs: Vec<f64> = records.iter().filter_map(|r| r.e_rel).map(f64::abs).collect();
    if errs.is_empty() {
        None
    } else {
        Some(errs.iter().sum::<f64>() / errs.len() as f64)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridPoint {
    pub joint: JointSpec,
    pub mean_abs_error: Option<f64>,
    pub failed_tests: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridResult {
    pub best: JointSpec,
    pub best_error: f64,
    pub surface: Vec<GridPoint>,
}

/// Log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

/// Cartesian grid of linear × rotational stiffnesses sharing one rigid factor.
pub fn joint_grid(linear: &[f64], rotational: &[f64], rigid_factor: f64) -> Vec<JointSpec> {
    linear
        .iter()
        .flat_map(|&k_linear| {
            rotational.iter().map(move |&k_rotational| JointSpec {
                k_linear,
                k_rotational,
                rigid_factor,
            })
        })
        .collect()
}

/// Grid point with the lowest mean |e_rel|. Ties go to the smaller
/// (k_linear, k_rotational) pair.
pub fn grid_search(
    specs: &[VaultTestSpec],
    measured: &[(usize, f64)],
    grid: &[JointSpec],
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::Config("empty calibration grid".into()));
    }
    let surface = grid
        .par_iter()
        .map(|&joint| {
            let records = run_calibration_suite(specs, measured, joint)?;
            Ok(GridPoint {
                joint,
                mean_abs_error: mean_abs_error(&records),
                failed_tests: records.iter().filter(|r| r.failed()).count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = surface
        .iter()
        .filter_map(|p| p.mean_abs_error.map(|e| (p, e)))
        .min_by(|(p, e), (q, f)| {
            e.total_cmp(f)
                .then(p.joint.k_linear.total_cmp(&q.joint.k_linear))
                .then(p.joint.k_rotational.total_cmp(&q.joint.k_rotational))
        })
        .ok_or_else(|| Error::Config("every grid point failed".into()))?;
    Ok(GridResult {
        best: best.0.joint,
        best_error: best.1,
        surface,
    })
}
