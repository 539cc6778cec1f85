//! Run configuration files. Every field is checked before any simulation
//! starts and unknown fields are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use matchlab_core::imsim::{BatchSchedule, ClearinghouseConfig, CutoffKind, PopulationConfig};
use serde::{Deserialize, Serialize};

pub const RUN_CONFIG_SCHEMA_VERSION: u32 = 1;

/// Clearinghouse behaviour; the seed comes from the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClearinghouseSettings {
    pub rho: f64,
    pub cutoff_kind: CutoffKind,
}

impl Default for ClearinghouseSettings {
    fn default() -> Self {
        let demo = ClearinghouseConfig::demo(0);
        Self {
            rho: demo.rho,
            cutoff_kind: demo.cutoff_kind,
        }
    }
}

impl ClearinghouseSettings {
    pub fn with_seed(&self, seed: u64) -> ClearinghouseConfig {
        ClearinghouseConfig {
            rho: self.rho,
            cutoff_kind: self.cutoff_kind,
            seed,
        }
    }
}

/// Payload of `imsim --config`. Omitted sections take the demo values; an
/// omitted schedule is the nine-band staggered default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImsimRunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub population: PopulationConfig,
    #[serde(default)]
    pub schedule: Option<BatchSchedule>,
    #[serde(default)]
    pub clearinghouse: ClearinghouseSettings,
}

impl Default for ImsimRunConfig {
    fn default() -> Self {
        Self {
            schema_version: RUN_CONFIG_SCHEMA_VERSION,
            population: PopulationConfig::default(),
            schedule: None,
            clearinghouse: ClearinghouseSettings::default(),
        }
    }
}

impl ImsimRunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json_str(&text).with_context(|| format!("config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != RUN_CONFIG_SCHEMA_VERSION {
            bail!(
                "schema_version {} is not supported (expected {RUN_CONFIG_SCHEMA_VERSION})",
                self.schema_version
            );
        }
        self.population.validate()?;
        self.schedule().validate()?;
        self.clearinghouse.with_seed(0).validate()?;
        Ok(())
    }

    pub fn schedule(&self) -> BatchSchedule {
        self.schedule.clone().unwrap_or_else(BatchSchedule::default_staggered)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_demo_values() {
        let cfg = ImsimRunConfig::from_json_str(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(cfg, ImsimRunConfig::default());
        assert_eq!(cfg.clearinghouse.rho, 0.5);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        for text in [
            r#"{"schema_version": 1, "seed": 4}"#,
            r#"{"schema_version": 1, "population": {"students": 10}}"#,
            r#"{"schema_version": 1, "clearinghouse": {"rho": 1.0, "seed": 3}}"#,
        ] {
            assert!(ImsimRunConfig::from_json_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        for text in [
            r#"{"schema_version": 2}"#,
            r#"{"schema_version": 1, "clearinghouse": {"rho": 1.5}}"#,
            r#"{"schema_version": 1, "population": {"num_students": 0}}"#,
        ] {
            assert!(ImsimRunConfig::from_json_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn schedule_is_validated() {
        let text = r#"{"schema_version": 1, "schedule": {"batches": [], "opening_hour": 0,
            "mandatory_entry_hour": null, "total_hours": 3}}"#;
        assert!(ImsimRunConfig::from_json_str(text).is_err());
    }
}
