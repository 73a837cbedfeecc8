//! Controller, safety-bound and vehicle configuration.
//!
//! Every tunable is addressable by a flat key so the same names work in a
//! config file (`key = value` lines, TOML syntax), as CLI overrides and as
//! `ASSIST_`-prefixed environment variables.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse config: {0}")]
    Parse(String),
}

/// Parameters of the geometric assistive controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Shared-control level; 1 means pure user control.
    pub n: u32,
    /// Scales the minimum incircle radius `R_v / mu_r`.
    pub mu_r: f64,
    /// Decay time scale of the arc-length rate above the critical speed (s).
    #[serde(rename = "T")]
    pub time_scale: f64,
    /// Critical velocity ratio; `v_c = v_m (1 - sigma)`.
    pub sigma: f64,
    /// Maximum vehicle speed (m/s).
    pub v_m: f64,
    /// Time-step difference amplitude dividing the arc-length rate.
    pub lambda_t: f64,
    /// Virtual wheel radius (m).
    #[serde(rename = "R_v")]
    pub r_v: f64,
    /// Joystick speed to velocity ratio.
    pub c: f64,
    /// Heading error to turn-rate ratio (1/s).
    pub c_psi: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            n: 3,
            mu_r: 0.1,
            time_scale: 2.0,
            sigma: 0.38,
            v_m: 3.0,
            lambda_t: 25.0,
            r_v: 0.133,
            c: 1.0,
            c_psi: 2.0,
        }
    }
}

impl ControllerConfig {
    pub fn critical_velocity(&self) -> f64 {
        self.v_m * (1.0 - self.sigma)
    }

    /// Reciprocal shared-control level `m = 1/n`.
    pub fn m(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks: [(bool, &str); 9] = [
            (self.n >= 1, "n must be >= 1"),
            (self.mu_r > 0.0 && self.mu_r <= 1.0, "mu_r must be in (0, 1]"),
            (self.sigma > 0.0 && self.sigma < 1.0, "sigma must be in (0, 1)"),
            (self.v_m > 0.0 && self.v_m.is_finite(), "v_m must be positive"),
            (self.lambda_t > 0.0 && self.lambda_t.is_finite(), "lambda_t must be positive"),
            (self.time_scale > 0.0 && self.time_scale.is_finite(), "T must be positive"),
            (self.r_v > 0.0 && self.r_v.is_finite(), "R_v must be positive"),
            (self.c > 0.0 && self.c.is_finite(), "c must be positive"),
            (self.c_psi >= 0.0 && self.c_psi.is_finite(), "c_psi must be non-negative"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(ConfigError::Invalid((*msg).to_string())),
            None => Ok(()),
        }
    }
}

/// Constants of the exponentially convergent velocity bound `u_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyBoundConfig {
    pub a_rho: f64,
    pub b_rho: f64,
    pub tau: f64,
}

impl Default for SafetyBoundConfig {
    fn default() -> Self {
        Self {
            a_rho: 1.0,
            b_rho: 1.0,
            tau: 1.0,
        }
    }
}

impl SafetyBoundConfig {
    /// `a_rho^2 (1 - exp(-b_rho tau))^2`, the factor multiplying `|u_u|^2`.
    pub fn gain_squared(&self) -> f64 {
        let g = self.a_rho * (1.0 - (-self.b_rho * self.tau).exp());
        g * g
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.a_rho > 0.0 && self.b_rho > 0.0 && self.tau > 0.0 {
            Ok(())
        } else {
            Err(ConfigError::Invalid(
                "a_rho, b_rho and tau must be positive".into(),
            ))
        }
    }
}

/// Everything a run or a session needs besides the route and the driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssistConfig {
    pub controller: ControllerConfig,
    pub bounds: SafetyBoundConfig,
    /// Actuated wheel separation (m).
    pub l: f64,
}

impl Default for AssistConfig {
    fn default() -> Self {
        Self {
            controller: ControllerConfig::default(),
            bounds: SafetyBoundConfig::default(),
            l: 0.5,
        }
    }
}

pub const CONFIG_KEYS: [&str; 13] = [
    "n", "mu_r", "T", "sigma", "v_m", "lambda_t", "R_v", "c", "c_psi", "a_rho", "b_rho", "tau",
    "l",
];

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|e| ConfigError::BadValue {
            key: key.into(),
            value: value.into(),
            reason: e.to_string(),
        })
}

impl AssistConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let c = &mut self.controller;
        match key {
            "n" => {
                c.n = value.trim().parse().map_err(|e: std::num::ParseIntError| {
                    ConfigError::BadValue {
                        key: key.into(),
                        value: value.into(),
                        reason: e.to_string(),
                    }
                })?
            }
            "mu_r" => c.mu_r = parse_f64(key, value)?,
            "T" => c.time_scale = parse_f64(key, value)?,
            "sigma" => c.sigma = parse_f64(key, value)?,
            "v_m" => c.v_m = parse_f64(key, value)?,
            "lambda_t" => c.lambda_t = parse_f64(key, value)?,
            "R_v" => c.r_v = parse_f64(key, value)?,
            "c" => c.c = parse_f64(key, value)?,
            "c_psi" => c.c_psi = parse_f64(key, value)?,
            "a_rho" => self.bounds.a_rho = parse_f64(key, value)?,
            "b_rho" => self.bounds.b_rho = parse_f64(key, value)?,
            "tau" => self.bounds.tau = parse_f64(key, value)?,
            "l" => self.l = parse_f64(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse(format!("expected key=value, got `{assignment}`")))?;
        self.set(k.trim(), v)
    }

    /// Parses a key-value config document over the defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let mut cfg = Self::default();
        for (key, value) in &table {
            let text = match value {
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                other => {
                    return Err(ConfigError::BadValue {
                        key: key.clone(),
                        value: other.to_string(),
                        reason: "expected a number".into(),
                    })
                }
            };
            cfg.set(key, &text)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Applies `ASSIST_<KEY>` overrides from the given variables. Key
    /// matching is case-insensitive, so `ASSIST_R_V` sets `R_v`.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (name, value) in vars {
            let Some(suffix) = name.strip_prefix("ASSIST_") else {
                continue;
            };
            if let Some(key) = CONFIG_KEYS.iter().find(|k| k.eq_ignore_ascii_case(suffix)) {
                self.set(key, &value)?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.controller.validate()?;
        self.bounds.validate()?;
        if self.l > 0.0 && self.l.is_finite() {
            Ok(())
        } else {
            Err(ConfigError::Invalid("l must be positive".into()))
        }
    }
}
