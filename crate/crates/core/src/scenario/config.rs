//! Scenario configuration with validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netbus::{AdversaryMode, AdversaryPolicy, CostProfile};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Names of the built-in adversary policies selectable by config.
pub const ADVERSARY_NAMES: [&str; 4] = ["passive", "drop", "modify", "replay"];

/// Everything a scenario run is parameterized by.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub customers: u32,
    pub orders_per_customer: u32,
    pub freshness_window_ms: u64,
    pub crp_db_size: usize,
    pub robot_pool_size: usize,
    pub adversary: String,
    pub profile: String,
}

impl Default for ScenarioConfig {
    fn default() -> ScenarioConfig {
        ScenarioConfig {
            seed: 1,
            customers: 1,
            orders_per_customer: 1,
            freshness_window_ms: crate::cryptokit::DEFAULT_FRESHNESS_WINDOW_MS,
            crp_db_size: 64,
            robot_pool_size: 1,
            adversary: "passive".to_string(),
            profile: "default".to_string(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let err = |msg: String| Err(ScenarioError::ConfigInvalid(msg));
        if self.customers == 0 || self.customers > 10_000 {
            return err(format!("customers must be in 1..=10000, got {}", self.customers));
        }
        if self.orders_per_customer == 0 || self.orders_per_customer > 100_000 {
            return err(format!(
                "orders_per_customer must be in 1..=100000, got {}",
                self.orders_per_customer
            ));
        }
        if self.freshness_window_ms == 0 || self.freshness_window_ms > 86_400_000 {
            return err(format!(
                "freshness_window_ms must be in 1..=86400000, got {}",
                self.freshness_window_ms
            ));
        }
        if self.crp_db_size == 0 || self.crp_db_size > 1_000_000 {
            return err(format!(
                "crp_db_size must be in 1..=1000000, got {}",
                self.crp_db_size
            ));
        }
        if self.robot_pool_size == 0 || self.robot_pool_size > 10_000 {
            return err(format!(
                "robot_pool_size must be in 1..=10000, got {}",
                self.robot_pool_size
            ));
        }
        // Every order draws one challenge from its robot's database.
        let per_robot = (self.customers as u64 * self.orders_per_customer as u64)
            .div_ceil(self.robot_pool_size as u64);
        if per_robot > self.crp_db_size as u64 {
            return err(format!(
                "crp_db_size {} cannot cover ~{per_robot} orders per robot",
                self.crp_db_size
            ));
        }
        if !ADVERSARY_NAMES.contains(&self.adversary.as_str()) {
            return err(format!("unknown adversary policy: {}", self.adversary));
        }
        if CostProfile::by_name(&self.profile).is_none() {
            return err(format!("unknown accounting profile: {}", self.profile));
        }
        Ok(())
    }

    pub fn adversary_policy(&self) -> AdversaryPolicy {
        let mode = match self.adversary.as_str() {
            "drop" => AdversaryMode::Drop,
            "modify" => AdversaryMode::Modify {
                byte_index: 11,
                value: 0x5a,
            },
            "replay" => AdversaryMode::Replay { delay_ms: 5_000 },
            _ => AdversaryMode::PassiveRecord,
        };
        AdversaryPolicy { mode, target: None }
    }

    pub fn cost_profile(&self) -> CostProfile {
        CostProfile::by_name(&self.profile).unwrap_or_else(CostProfile::default_profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn out_of_range_fields_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.customers = 0;
        assert!(matches!(
            cfg.validate(),
            Err(ScenarioError::ConfigInvalid(_))
        ));
        let mut cfg = ScenarioConfig::default();
        cfg.adversary = "mitm".to_string();
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.profile = "exotic".to_string();
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.orders_per_customer = 200;
        cfg.crp_db_size = 10;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn json_round_trip_with_defaults() {
        let cfg: ScenarioConfig = serde_json::from_str(r#"{"seed": 9}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.customers, 1);
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"unknown_key": 1}"#).is_err());
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioConfig>(&text).unwrap(), cfg);
    }
}
