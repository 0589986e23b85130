//! Run manifests: everything needed to rerun an experiment bit for bit.

use serde::Serialize;
use serde_json::Value;

use crate::config::LabConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridInfo {
    pub n_points: usize,
    /// `(x₀, period)` of the periodic interval.
    pub domain: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub system: String,
    /// The full configuration with defaults filled in; it can be passed back
    /// to `fuchsol run --config`.
    pub config: LabConfig,
    pub grid: GridInfo,
    pub schedule: Value,
    pub seed: u64,
    pub code_version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: &LabConfig, grid: GridInfo, schedule: Value, outputs: Vec<String>) -> Self {
        Self {
            system: config.system.name().into(),
            config: config.clone(),
            grid,
            schedule,
            seed: config.seed,
            code_version: env!("CARGO_PKG_VERSION").into(),
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifests serialise")
    }
}
