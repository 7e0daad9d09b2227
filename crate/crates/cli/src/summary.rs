//! `summary.json`, written after every run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use phasewig_core::io::{write_atomic, HeatmapRange};
use phasewig_core::numgrid::{AxisSpec, PhaseGrid};

use crate::checks::Check;

pub const SCHEMA: &str = include_str!("../schema/summary.schema.json");
pub const TOOLKIT: &str = "phasewig";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    ValidationFailure,
    NumericalGateFailure,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::ValidationFailure => 1,
            Status::NumericalGateFailure => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridInfo {
    pub q: AxisSpec,
    pub p: AxisSpec,
    pub hbar: f64,
}

impl From<&PhaseGrid> for GridInfo {
    fn from(g: &PhaseGrid) -> Self {
        Self { q: g.q, p: g.p, hbar: g.hbar }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generating_function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Heatmaps {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pgm: Option<HeatmapRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppm: Option<HeatmapRange>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub task: String,
    pub status: Status,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridInfo>,
    pub provenance: Provenance,
    pub diagnostics: BTreeMap<String, f64>,
    pub heatmaps: Heatmaps,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
    pub wall_time_s: f64,
}

impl Summary {
    pub fn new(task: impl Into<String>) -> Self {
        Self {
            toolkit: TOOLKIT,
            version: env!("CARGO_PKG_VERSION"),
            task: task.into(),
            status: Status::Ok,
            exit_code: 0,
            message: None,
            scenario: None,
            seed: None,
            grid: None,
            provenance: Provenance::default(),
            diagnostics: BTreeMap::new(),
            heatmaps: Heatmaps::default(),
            checks: Vec::new(),
            files: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn set_status(&mut self, status: Status, message: Option<String>) {
        self.status = status;
        self.exit_code = status.exit_code();
        self.message = message;
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serialises");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> phasewig_core::Result<()> {
        write_atomic(&dir.join("summary.json"), self.to_json().as_bytes())
    }
}
