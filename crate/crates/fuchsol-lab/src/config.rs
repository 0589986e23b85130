//! Versioned JSON configuration.
//!
//! ```json
//! { "schema": "fuchsol/v1", "system": "euler", "seed": 3, "params": { "delta": 0.002 } }
//! ```
//!
//! `params` holds the system's own keys; anything omitted takes its default
//! and unknown keys are rejected at every level.

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use fuchsol_euler::{DataProfile, ExperimentConfig};
use fuchsol_minkowski::MinkowskiConfig;
use fuchsol_schwarzschild::SchwarzschildConfig;

use crate::error::LabError;
use crate::ode::OdeConfig;

pub const SCHEMA: &str = "fuchsol/v1";
pub const SEED_ENV: &str = "FUCHSOL_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Ode,
    Euler,
    Minkowski,
    Schwarzschild,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [SystemKind::Ode, SystemKind::Euler, SystemKind::Minkowski, SystemKind::Schwarzschild];

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Ode => "ode",
            SystemKind::Euler => "euler",
            SystemKind::Minkowski => "minkowski",
            SystemKind::Schwarzschild => "schwarzschild",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SystemParams {
    Ode(OdeConfig),
    Euler(ExperimentConfig),
    Minkowski(MinkowskiConfig),
    Schwarzschild(SchwarzschildConfig),
}

/// A parsed configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabConfig {
    pub schema: String,
    pub system: SystemKind,
    pub seed: u64,
    pub params: SystemParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: String,
    #[serde(default)]
    system: Option<SystemKind>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    params: Map<String, Value>,
}

fn overlay<T: Serialize + DeserializeOwned>(defaults: &T, user: Map<String, Value>) -> Result<T, LabError> {
    let mut base = match serde_json::to_value(defaults).expect("configs serialise") {
        Value::Object(m) => m,
        _ => unreachable!("configs are objects"),
    };
    // Optional fields serialise as null; dropping them lets the defaults
    // apply and keeps "null" out of user-facing diagnostics.
    base.retain(|_, v| !v.is_null());
    base.extend(user);
    serde_json::from_value(Value::Object(base)).map_err(|e| LabError::Usage(format!("params: {e}")))
}

impl LabConfig {
    pub fn default_for(system: SystemKind) -> Self {
        let params = match system {
            SystemKind::Ode => SystemParams::Ode(OdeConfig::default()),
            SystemKind::Euler => SystemParams::Euler(ExperimentConfig::default()),
            SystemKind::Minkowski => SystemParams::Minkowski(MinkowskiConfig::default()),
            SystemKind::Schwarzschild => SystemParams::Schwarzschild(SchwarzschildConfig::default()),
        };
        Self { schema: SCHEMA.into(), system, seed: 0, params }
    }

    /// Parses `text` for `system`. Syntax errors report line and column,
    /// unknown or ill-typed keys report the key.
    pub fn parse(text: &str, system: SystemKind) -> Result<Self, LabError> {
        let raw: RawConfig = serde_json::from_str(text)
            .map_err(|e| LabError::Usage(format!("config line {} column {}: {e}", e.line(), e.column())))?;
        if raw.schema != SCHEMA {
            return Err(LabError::Usage(format!("config schema is {:?}, expected {SCHEMA:?}", raw.schema)));
        }
        if let Some(s) = raw.system {
            if s != system {
                return Err(LabError::Usage(format!("config is for system {:?} but --system is {:?}", s.name(), system.name())));
            }
        }
        let params = match system {
            SystemKind::Ode => SystemParams::Ode(overlay(&OdeConfig::default(), raw.params)?),
            SystemKind::Euler => SystemParams::Euler(overlay(&ExperimentConfig::default(), raw.params)?),
            SystemKind::Minkowski => SystemParams::Minkowski(overlay(&MinkowskiConfig::default(), raw.params)?),
            SystemKind::Schwarzschild => SystemParams::Schwarzschild(overlay(&SchwarzschildConfig::default(), raw.params)?),
        };
        Ok(Self { schema: SCHEMA.into(), system, seed: raw.seed.unwrap_or(0), params })
    }

    /// Applies an override of the seed, as read from `FUCHSOL_SEED`. A
    /// random Euler data profile takes the same seed.
    pub fn with_seed_override(mut self, value: Option<&str>) -> Result<Self, LabError> {
        if let Some(v) = value {
            let seed = v
                .trim()
                .parse::<u64>()
                .map_err(|_| LabError::Usage(format!("{SEED_ENV} must be a non-negative integer, got {v:?}")))?;
            self.seed = seed;
            if let SystemParams::Euler(cfg) = &mut self.params {
                if let DataProfile::Random { seed: s } = &mut cfg.data_profile {
                    *s = seed;
                }
            }
        }
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialise")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = LabConfig::parse(r#"{"schema": "fuchsol/v1", "params": {"delta": 0.002}}"#, SystemKind::Euler).unwrap();
        match &c.params {
            SystemParams::Euler(e) => {
                assert_eq!(e.delta, 0.002);
                assert_eq!(e.n_points, 256);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn round_trip_through_json() {
        for s in SystemKind::ALL {
            let c = LabConfig::default_for(s);
            let back = LabConfig::parse(&c.to_json(), s).unwrap();
            assert_eq!(back, c, "{s:?}");
        }
    }

    #[test]
    fn rejects_bad_documents() {
        let err = |t: &str, s| LabConfig::parse(t, s).unwrap_err().to_string();
        assert!(err(r#"{"schema": "fuchsol/v0"}"#, SystemKind::Ode).contains("schema"));
        assert!(err(r#"{"schema": "fuchsol/v1", "sead": 1}"#, SystemKind::Ode).contains("sead"));
        assert!(err(r#"{"schema": "fuchsol/v1", "params": {"lamda": 1}}"#, SystemKind::Minkowski).contains("lamda"));
        assert!(err(r#"{"schema": "fuchsol/v1", "system": "euler"}"#, SystemKind::Ode).contains("euler"));
        let e = err("{\n  \"schema\": \"fuchsol/v1\",\n  oops\n}", SystemKind::Ode);
        assert!(e.contains("line 3"), "{e}");
        assert_eq!(LabConfig::parse("{}", SystemKind::Ode).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn seed_override() {
        let mut c = LabConfig::default_for(SystemKind::Euler);
        if let SystemParams::Euler(e) = &mut c.params {
            e.data_profile = DataProfile::Random { seed: 1 };
        }
        let c = c.with_seed_override(Some("42")).unwrap();
        assert_eq!(c.seed, 42);
        match c.params {
            SystemParams::Euler(e) => assert_eq!(e.data_profile, DataProfile::Random { seed: 42 }),
            _ => unreachable!(),
        }
        assert!(LabConfig::default_for(SystemKind::Ode).with_seed_override(Some("x")).is_err());
        assert_eq!(LabConfig::default_for(SystemKind::Ode).with_seed_override(None).unwrap().seed, 0);
    }
}
