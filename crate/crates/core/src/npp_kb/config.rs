use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::KbError;

/// Thresholds and switches the knowledge base is instantiated with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbConfig {
    /// Seconds an attempted action suppresses its own recommendation.
    pub action_execution_time_range: i64,
    /// Steam generator water level (cm) below which supply is lacking.
    pub water_level_minimum: i64,
    pub upper_pressure_boundary_primary_loop: i64,
    /// Primary pressure (PSI) below which a commanded relief-valve closure
    /// has visibly failed.
    pub porv_closure_setpoint: i64,
    /// Primary pressure (PSI) below which the injection pumps should run.
    pub hpis_actuation_pressure: i64,
    /// Use the suppression rule as printed instead of the intended one.
    pub literal_suppression: bool,
}

impl Default for KbConfig {
    fn default() -> Self {
        KbConfig {
            action_execution_time_range: 8521,
            water_level_minimum: 30,
            upper_pressure_boundary_primary_loop: 2255,
            porv_closure_setpoint: 2205,
            hpis_actuation_pressure: 1600,
            literal_suppression: false,
        }
    }
}

const INT_KEYS: [&str; 5] = [
    "action_execution_time_range",
    "water_level_minimum",
    "upper_pressure_boundary_primary_loop",
    "porv_closure_setpoint",
    "hpis_actuation_pressure",
];

impl KbConfig {
    /// The profile under which the open-valve recommendation at t=1201 is
    /// live: attempts at 499/500 stop suppressing after 600 s.
    pub fn short_suppression() -> Self {
        KbConfig {
            action_execution_time_range: 600,
            ..KbConfig::default()
        }
    }

    fn int_mut(&mut self, key: &str) -> Option<&mut i64> {
        Some(match key {
            "action_execution_time_range" => &mut self.action_execution_time_range,
            "water_level_minimum" => &mut self.water_level_minimum,
            "upper_pressure_boundary_primary_loop" => &mut self.upper_pressure_boundary_primary_loop,
            "porv_closure_setpoint" => &mut self.porv_closure_setpoint,
            "hpis_actuation_pressure" => &mut self.hpis_actuation_pressure,
            _ => return None,
        })
    }

    fn int(&self, key: &str) -> i64 {
        match key {
            "action_execution_time_range" => self.action_execution_time_range,
            "water_level_minimum" => self.water_level_minimum,
            "upper_pressure_boundary_primary_loop" => self.upper_pressure_boundary_primary_loop,
            "porv_closure_setpoint" => self.porv_closure_setpoint,
            "hpis_actuation_pressure" => self.hpis_actuation_pressure,
            _ => unreachable!("INT_KEYS only"),
        }
    }

    pub fn validate(&self) -> Result<(), KbError> {
        for k in INT_KEYS {
            if self.int(k) <= 0 {
                return Err(KbError::Config {
                    line: 0,
                    message: format!("{k} must be positive"),
                });
            }
        }
        Ok(())
    }

    /// Sets one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        if key == "literal_suppression" {
            self.literal_suppression = value
                .parse()
                .map_err(|_| format!("literal_suppression expects true or false, got `{value}`"))?;
            return Ok(());
        }
        let slot = self.int_mut(key).ok_or_else(|| format!("unknown key `{key}`"))?;
        *slot = value
            .parse()
            .map_err(|_| format!("{key} expects an integer, got `{value}`"))?;
        Ok(())
    }

    /// Parameter facts appended to the rule files.
    pub fn facts(&self) -> String {
        INT_KEYS
            .iter()
            .map(|k| format!("{k}({}).\n", self.int(k)))
            .collect()
    }
}

/// Flat `key=value` lines; `#` starts a comment, unknown keys are errors and
/// missing keys keep their defaults.
impl FromStr for KbConfig {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self, KbError> {
        let mut cfg = KbConfig::default();
        for (i, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| KbError::Config { line: i + 1, message };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            cfg.set(k.trim(), v.trim()).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for KbConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in INT_KEYS {
            writeln!(f, "{k}={}", self.int(k))?;
        }
        writeln!(f, "literal_suppression={}", self.literal_suppression)
    }
}
