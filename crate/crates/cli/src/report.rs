//! Report JSON schema and CSV emitters. Files are written atomically
//! (write to a temp sibling, then rename).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use thermogauge_core::dynamics::{IntervalPartition, TrajectoryGrid};
use thermogauge_core::functionals::ThermoRecord;
use thermogauge_core::operators::expectation;
use thermogauge_core::thermo_group::gauge_entropy;

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermo_record: Option<ThermoRecordJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry_checks: Option<Vec<GeometryCheckJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<SuiteJson>>,
}

impl Report {
    pub fn new(config: &RunConfig, with_timestamp: bool) -> Self {
        Self {
            schema: crate::config::SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            timestamp: with_timestamp.then(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            }),
            config: config.clone(),
            thermo_record: None,
            partition: None,
            geometry_checks: None,
            suites: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Scalar ledger of one run; the per-step power traces go to CSV instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoRecordJson {
    pub u_initial: f64,
    pub u_final: f64,
    pub delta_u: f64,
    pub w_inv: f64,
    pub q_inv: f64,
    pub first_law_residual: f64,
    pub s_gt_initial: f64,
    pub s_gt_final: f64,
    pub w_per_interval: Vec<f64>,
    pub q_per_interval: Vec<f64>,
}

impl From<&ThermoRecord> for ThermoRecordJson {
    fn from(r: &ThermoRecord) -> Self {
        Self {
            u_initial: r.u_initial,
            u_final: r.u_final,
            delta_u: r.u_final - r.u_initial,
            w_inv: r.w_inv,
            q_inv: r.q_inv,
            first_law_residual: r.first_law_residual,
            s_gt_initial: r.s_initial,
            s_gt_final: r.s_final,
            w_per_interval: r.w_per_interval.clone(),
            q_per_interval: r.q_per_interval.clone(),
        }
    }
}

/// Degeneracy-change partition with per-interval group signatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub boundaries: Vec<f64>,
    pub boundary_indices: Vec<usize>,
    pub signatures: Vec<Vec<usize>>,
}

impl From<&IntervalPartition> for PartitionJson {
    fn from(p: &IntervalPartition) -> Self {
        Self {
            boundaries: p.boundaries().to_vec(),
            boundary_indices: p.boundary_indices().to_vec(),
            signatures: p.signatures().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteJson {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryCheckJson {
    pub name: String,
    pub h_values: Vec<f64>,
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_order: Option<f64>,
}

/// Write bytes atomically: temp sibling file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Per-step series CSV: t, work_power, heat_power, U, S_GT_instant.
pub fn series_csv(traj: &TrajectoryGrid, record: &ThermoRecord) -> String {
    let mut out = String::from("t,work_power,heat_power,U,S_GT_instant\n");
    for i in 0..traj.len() {
        let u = expectation(&traj.states()[i], &traj.hamiltonians()[i]).expect("matched dims");
        let s = gauge_entropy(&traj.states()[i], traj.frames()[i].structure())
            .expect("matched dims");
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            traj.times()[i],
            record.work_power[i],
            record.heat_power[i],
            u,
            s
        ));
    }
    out
}

/// One sweep row per parameter value, in input order.
pub fn sweep_csv_header() -> &'static str {
    "value,W_inv,Q_inv,delta_U,S_GT_initial,S_GT_final,first_law_residual\n"
}

pub fn sweep_csv_row(value: f64, record: &ThermoRecord) -> String {
    format!(
        "{},{},{},{},{},{},{}\n",
        value,
        record.w_inv,
        record.q_inv,
        record.u_final - record.u_initial,
        record.s_initial,
        record.s_final,
        record.first_law_residual
    )
}
