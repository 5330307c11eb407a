//! Run configuration read from TOML.
//!
//! Every section and key is optional; an empty file reproduces the default
//! operating point. Grammar:
//!
//! ```toml
//! [system]        # SystemConfig fields
//! num_ports = 4
//! fa_size = 1.0
//! large_scale = 1.0
//! avg_snr_db = 20.0
//! snr_threshold_db = 0.0
//! payload_bits = 5000.0
//! bandwidth_hz = 2e9
//! delay_threshold_s = 3e-3
//!
//! [model]
//! copula = "homogeneous"          # homogeneous | paper-literal | independence
//! outer_index_rule = "last-port"  # last-port | mean-theta | max-theta
//! # theta = 0.5                   # overrides the homogeneous θ
//! clamp_floor = 1e-6
//! dor_mode = "paper"              # paper | corrected
//!
//! [sweep]
//! metric = "op"                   # op | dor
//! x_axis = "avg_snr_db"           # avg_snr_db | payload_bits
//! x_values = [0, 5, 10, 15, 20, 25, 30, 35, 40]
//! vary = "fa_size"                # fa_size | num_ports | none
//! vary_values = [0.5, 1, 2, 4, 6]
//! engines = ["exact", "asymptotic"]   # plus "montecarlo"
//! single_antenna_baseline = false
//!
//! [monte_carlo]
//! samples = 1000000
//! seed = 1
//!
//! [validate]
//! num_ports = [2, 4, 10]
//! fa_size = [0.5, 1, 4]
//! avg_snr_db = [10, 20, 30]
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{SystemConfig, DEFAULT_CLAMP_FLOOR};
use crate::copula::{CopulaMode, OuterIndexRule};
use crate::error::{Error, Result};
use crate::metrics::DorThresholdMode;
use crate::montecarlo::{DEFAULT_SAMPLES, MIN_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Op,
    Dor,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "op" => Ok(Metric::Op),
            "dor" => Ok(Metric::Dor),
            other => Err(Error::invalid(
                "metric",
                format!("unknown metric '{other}' (op|dor)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XAxis {
    AvgSnrDb,
    PayloadBits,
}

impl XAxis {
    pub fn apply(self, config: &mut SystemConfig, x: f64) {
        match self {
            XAxis::AvgSnrDb => config.avg_snr_db = x,
            XAxis::PayloadBits => config.payload_bits = x,
        }
    }
}

/// Per-curve parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vary {
    FaSize,
    NumPorts,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Asymptotic,
    #[serde(alias = "mc")]
    Montecarlo,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Engine::Exact),
            "asymptotic" => Ok(Engine::Asymptotic),
            "mc" | "montecarlo" => Ok(Engine::Montecarlo),
            other => Err(Error::invalid(
                "engines",
                format!("unknown engine '{other}' (exact|asymptotic|mc)"),
            )),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Exact => "exact",
            Engine::Asymptotic => "asymptotic",
            Engine::Montecarlo => "mc",
        })
    }
}

/// Parses a comma-separated engine list such as `exact,mc`.
pub fn parse_engines(list: &str) -> Result<Vec<Engine>> {
    let mut engines = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Engine::from_str)
        .collect::<Result<Vec<_>>>()?;
    engines.sort();
    engines.dedup();
    if engines.is_empty() {
        return Err(Error::invalid("engines", "at least one engine is required"));
    }
    Ok(engines)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub copula: CopulaMode,
    pub outer_index_rule: OuterIndexRule,
    pub theta: Option<f64>,
    pub clamp_floor: f64,
    pub dor_mode: DorThresholdMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            copula: CopulaMode::default(),
            outer_index_rule: OuterIndexRule::default(),
            theta: None,
            clamp_floor: DEFAULT_CLAMP_FLOOR,
            dor_mode: DorThresholdMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub metric: Metric,
    pub x_axis: XAxis,
    pub x_values: Vec<f64>,
    pub vary: Vary,
    pub vary_values: Vec<f64>,
    pub engines: Vec<Engine>,
    pub single_antenna_baseline: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            metric: Metric::Op,
            x_axis: XAxis::AvgSnrDb,
            x_values: (0..=8).map(|i| 5.0 * i as f64).collect(),
            vary: Vary::FaSize,
            vary_values: vec![0.5, 1.0, 2.0, 4.0, 6.0],
            engines: vec![Engine::Exact, Engine::Asymptotic],
            single_antenna_baseline: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 1,
        }
    }
}

/// Grid of the closed-form versus simulation agreement checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub num_ports: Vec<usize>,
    pub fa_size: Vec<f64>,
    pub avg_snr_db: Vec<f64>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            num_ports: vec![2, 4, 10],
            fa_size: vec![0.5, 1.0, 4.0],
            avg_snr_db: vec![10.0, 20.0, 30.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub model: ModelConfig,
    pub sweep: SweepConfig,
    pub monte_carlo: MonteCarloConfig,
    pub validate: ValidateConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads and checks a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = Self::from_toml(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Rejects bad fields before any computation starts.
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if let Some(theta) = self.model.theta {
            if !(theta >= 0.0 && theta.is_finite()) {
                return Err(Error::invalid(
                    "model.theta",
                    format!("{theta} is not a finite non-negative Clayton parameter"),
                ));
            }
        }
        if !(0.0..1.0).contains(&self.model.clamp_floor) {
            return Err(Error::invalid(
                "model.clamp_floor",
                format!("{} is outside [0, 1)", self.model.clamp_floor),
            ));
        }
        if self.monte_carlo.samples < MIN_SAMPLES {
            return Err(Error::invalid(
                "monte_carlo.samples",
                format!(
                    "{} is below the minimum of {MIN_SAMPLES}",
                    self.monte_carlo.samples
                ),
            ));
        }
        let v = &self.validate;
        if v.num_ports.is_empty() || v.fa_size.is_empty() || v.avg_snr_db.is_empty() {
            return Err(Error::invalid("validate", "grid lists must be nonempty"));
        }
        for &k in &v.num_ports {
            if k < 1 {
                return Err(Error::invalid(
                    "validate.num_ports",
                    "at least one port is required",
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_setup() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.sweep.x_values.len(), 9);
        assert_eq!(c.sweep.x_values[8], 40.0);
        c.validate().unwrap();
    }

    #[test]
    fn sections_override_fields() {
        let c = RunConfig::from_toml(
            r#"
            [system]
            num_ports = 10
            [model]
            copula = "paper-literal"
            dor_mode = "corrected"
            [sweep]
            metric = "dor"
            engines = ["exact", "mc"]
            vary = "none"
            "#,
        )
        .unwrap();
        assert_eq!(c.system.num_ports, 10);
        assert_eq!(c.system.fa_size, 1.0);
        assert_eq!(c.model.copula, CopulaMode::PaperLiteral);
        assert_eq!(c.sweep.metric, Metric::Dor);
        assert_eq!(c.sweep.engines, vec![Engine::Exact, Engine::Montecarlo]);
        assert_eq!(c.sweep.vary, Vary::None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[system]\nports = 3\n").is_err());
    }

    #[test]
    fn negative_theta_is_a_usage_error() {
        let c = RunConfig::from_toml("[model]\ntheta = -0.5\n").unwrap();
        match c.validate() {
            Err(Error::InvalidArgument { field, .. }) => assert_eq!(field, "model.theta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn engine_lists() {
        assert_eq!(
            parse_engines("mc, exact,mc").unwrap(),
            vec![Engine::Exact, Engine::Montecarlo]
        );
        assert!(parse_engines("").is_err());
        assert!(parse_engines("exact,bogus").is_err());
    }
}
