//! Runtime configuration: every tunable default in one overridable struct.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use stlplan_core::allocation::AllocationConfig;
use stlplan_core::generation::AnalyticPredictor;
use stlplan_core::stl::RobustnessConfig;
use stlplan_core::world::{DynamicsParams, TrackingConfig};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    // time predictor
    pub gamma: f64,
    pub v_ref: f64,
    // allocation
    pub n_max: usize,
    pub sample_margin: f64,
    pub dfs_node_budget: u64,
    // dynamics
    pub dt: f64,
    pub a_max: f64,
    pub v_max: f64,
    // tracking
    pub kp: f64,
    pub kd: f64,
    pub substeps: usize,
    // monitoring
    pub eta: i64,
    pub rho_max: f64,
    // task generation
    pub horizon_budget: i64,
    pub region_radius_min: f64,
    pub region_radius_max: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            gamma: 1.0,
            v_ref: 0.5,
            n_max: 1,
            sample_margin: 0.5,
            dfs_node_budget: 100_000,
            dt: 1.0,
            a_max: 0.5,
            v_max: 1.0,
            kp: 1.2,
            kd: 1.8,
            substeps: 1,
            eta: 1,
            rho_max: 10.0,
            horizon_budget: 120,
            region_radius_min: 0.4,
            region_radius_max: 0.8,
        }
    }
}

impl Config {
    /// Reads TOML or JSON, decided by extension (`.json` vs anything else).
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .with_context(|| format!("parsing JSON config {}", path.display()))?
        } else {
            toml::from_str(&text)
                .with_context(|| format!("parsing TOML config {}", path.display()))?
        };
        Ok(cfg)
    }

    pub fn predictor(&self) -> AnalyticPredictor {
        AnalyticPredictor {
            gamma: self.gamma,
            v_ref: self.v_ref,
        }
    }

    pub fn allocation(&self, seed: u64) -> AllocationConfig {
        AllocationConfig {
            n_max: self.n_max,
            seed,
            sample_margin: self.sample_margin,
            dfs_node_budget: self.dfs_node_budget,
        }
    }

    pub fn dynamics(&self) -> DynamicsParams {
        DynamicsParams {
            dt: self.dt,
            a_max: self.a_max,
            v_max: self.v_max,
        }
    }

    pub fn tracking(&self) -> TrackingConfig {
        TrackingConfig {
            kp: self.kp,
            kd: self.kd,
            substeps: self.substeps.max(1),
        }
    }

    pub fn robustness(&self) -> RobustnessConfig {
        RobustnessConfig {
            rho_max: self.rho_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_defaults() {
        let dir = std::env::temp_dir().join("stlplan-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.toml");
        std::fs::write(&p, "gamma = 1.2\nkp = 2.0\n").unwrap();
        let c = Config::load(&p).unwrap();
        assert_eq!(c.gamma, 1.2);
        assert_eq!(c.kp, 2.0);
        assert_eq!(c.v_ref, Config::default().v_ref);
    }

    #[test]
    fn json_is_accepted_and_unknown_keys_rejected() {
        let dir = std::env::temp_dir().join("stlplan-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        std::fs::write(&p, "{\"eta\": 2}").unwrap();
        assert_eq!(Config::load(&p).unwrap().eta, 2);
        std::fs::write(&p, "{\"no_such_key\": 2}").unwrap();
        assert!(Config::load(&p).is_err());
    }
}
