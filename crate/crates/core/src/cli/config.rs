//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored; a `#` after a value starts a
//! trailing comment. Keys are case-sensitive and may appear once.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use crate::model::{RotatingField, SpinConstants, StaticFields, DEFAULT_FAST_RATIO};
use crate::noise::NoiseModel;
use crate::propagate::{Method, PropagationConfig, STEPS_PER_FAST_PERIOD};

/// Slow-rotation cycles simulated when neither `duration_us` nor `cycles`
/// is given.
pub const DEFAULT_CYCLES: u32 = 20;
pub const DEFAULT_OMEGA_PRIME_MHZ: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Everything a run needs. Drive fields left unset follow ω′:
/// ω₁ = ω′/2, ω = 25ω′, duration = cycles/ω′, step = 1/(40ω).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub constants: SpinConstants,
    pub fields: StaticFields,
    pub omega_prime: f64,
    pub omega1: Option<f64>,
    pub omega: Option<f64>,
    pub phi0: f64,
    pub duration: Option<f64>,
    pub cycles: u32,
    pub step: Option<f64>,
    pub method: Method,
    pub tolerance: Option<f64>,
    pub noise: NoiseModel,
    pub carbon: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            constants: SpinConstants::default(),
            fields: StaticFields::default(),
            omega_prime: DEFAULT_OMEGA_PRIME_MHZ,
            omega1: None,
            omega: None,
            phi0: 0.0,
            duration: None,
            cycles: DEFAULT_CYCLES,
            step: None,
            method: Method::PiecewiseExpm,
            tolerance: None,
            noise: NoiseModel::default(),
            carbon: false,
        }
    }
}

/// Recognized keys, in documentation order.
pub const KEYS: &[&str] = &[
    "D_MHz",
    "A_par_N_MHz",
    "A_perp_N_MHz",
    "A_par_C_MHz",
    "d_perp_Hz_cm_per_V",
    "gamma_e_MHz_per_mT",
    "gammaB0_MHz",
    "dE0_MHz",
    "deltaB_MHz",
    "shiftB",
    "shiftE",
    "omega_prime_MHz",
    "omega1_MHz",
    "omega_MHz",
    "phi0_rad",
    "duration_us",
    "cycles",
    "step_us",
    "method",
    "tolerance",
    "tau_c_us",
    "trajectories",
    "seed",
    "carbon",
];

fn number(key: &str, value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("`{key}` expects a number, got `{value}`"))?;
    if !v.is_finite() {
        return Err(format!("`{key}` must be finite"));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}` expects a non-negative integer, got `{value}`"))
}

impl RunConfig {
    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "D_MHz" => self.constants.d = number(key, value)?,
            "A_par_N_MHz" => self.constants.a_par_n = number(key, value)?,
            "A_perp_N_MHz" => self.constants.a_perp_n = number(key, value)?,
            "A_par_C_MHz" => self.constants.a_par_c = number(key, value)?,
            "d_perp_Hz_cm_per_V" => self.constants.d_perp = number(key, value)?,
            "gamma_e_MHz_per_mT" => self.constants.gamma_e = number(key, value)?,
            "gammaB0_MHz" => self.fields.gamma_b0 = number(key, value)?,
            "dE0_MHz" => self.fields.d_e0 = number(key, value)?,
            "deltaB_MHz" => {
                self.fields.delta_b = number(key, value)?;
                self.noise.delta_b = self.fields.delta_b;
            }
            "shiftB" => self.fields.shift_b = number(key, value)?,
            "shiftE" => self.fields.shift_e = number(key, value)?,
            "omega_prime_MHz" => self.omega_prime = number(key, value)?,
            "omega1_MHz" => self.omega1 = Some(number(key, value)?),
            "omega_MHz" => self.omega = Some(number(key, value)?),
            "phi0_rad" => self.phi0 = number(key, value)?,
            "duration_us" => self.duration = Some(number(key, value)?),
            "cycles" => self.cycles = integer(key, value)?,
            "step_us" => self.step = Some(number(key, value)?),
            "method" => {
                self.method = match value.to_ascii_lowercase().as_str() {
                    "expm" | "piecewise" | "piecewise_expm" => Method::PiecewiseExpm,
                    "rk4" => Method::Rk4,
                    _ => return Err(format!("`method` must be `expm` or `rk4`, got `{value}`")),
                }
            }
            "tolerance" => self.tolerance = Some(number(key, value)?),
            "tau_c_us" => self.noise.tau_c = number(key, value)?,
            "trajectories" => self.noise.trajectories = integer(key, value)?,
            "seed" => self.noise.seed = integer(key, value)?,
            "carbon" => {
                self.carbon = match value {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    _ => return Err(format!("`carbon` must be true or false, got `{value}`")),
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::at(n, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(ConfigError::at(n, format!("`{key}` has no value")));
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::at(n, format!("duplicate key `{key}`")));
            }
            cfg.set(key, value).map_err(|m| ConfigError::at(n, m))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The gate drive with unset fields derived from ω′.
    pub fn drive(&self) -> RotatingField {
        let wp = self.omega_prime;
        RotatingField {
            omega1: self.omega1.unwrap_or(wp / 2.0),
            omega: self.omega.unwrap_or(DEFAULT_FAST_RATIO * wp),
            omega_prime: wp,
            phi0: self.phi0,
            duration: self.duration.unwrap_or(self.cycles as f64 / wp),
        }
    }

    pub fn propagation(&self) -> PropagationConfig {
        let r = self.drive();
        PropagationConfig {
            step: self
                .step
                .unwrap_or(1.0 / (STEPS_PER_FAST_PERIOD * r.omega.abs())),
            method: self.method,
            tolerance: self.tolerance,
        }
    }

    /// Check every parameter block; failures are configuration errors.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let wrap = |e: crate::Error| ConfigError::new(e.to_string());
        self.constants.validate().map_err(wrap)?;
        self.fields.validate().map_err(wrap)?;
        self.drive().validate().map_err(wrap)?;
        self.propagation().validate().map_err(wrap)?;
        self.noise.validate().map_err(wrap)?;
        if self.cycles == 0 {
            return Err(ConfigError::new("`cycles` must be >= 1"));
        }
        Ok(())
    }

    /// Render back to the config format (round-trips through [`parse`]).
    ///
    /// [`parse`]: RunConfig::parse
    pub fn render(&self) -> String {
        let c = &self.constants;
        let s = &self.fields;
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("D_MHz", c.d.to_string());
        put("A_par_N_MHz", c.a_par_n.to_string());
        put("A_perp_N_MHz", c.a_perp_n.to_string());
        put("A_par_C_MHz", c.a_par_c.to_string());
        put("d_perp_Hz_cm_per_V", c.d_perp.to_string());
        put("gamma_e_MHz_per_mT", c.gamma_e.to_string());
        put("gammaB0_MHz", s.gamma_b0.to_string());
        put("dE0_MHz", s.d_e0.to_string());
        put("deltaB_MHz", s.delta_b.to_string());
        put("shiftB", s.shift_b.to_string());
        put("shiftE", s.shift_e.to_string());
        put("omega_prime_MHz", self.omega_prime.to_string());
        if let Some(v) = self.omega1 {
            put("omega1_MHz", v.to_string());
        }
        if let Some(v) = self.omega {
            put("omega_MHz", v.to_string());
        }
        put("phi0_rad", self.phi0.to_string());
        if let Some(v) = self.duration {
            put("duration_us", v.to_string());
        }
        put("cycles", self.cycles.to_string());
        if let Some(v) = self.step {
            put("step_us", v.to_string());
        }
        put(
            "method",
            match self.method {
                Method::PiecewiseExpm => "expm".into(),
                Method::Rk4 => "rk4".into(),
            },
        );
        if let Some(v) = self.tolerance {
            put("tolerance", v.to_string());
        }
        put("tau_c_us", self.noise.tau_c.to_string());
        put("trajectories", self.noise.trajectories.to_string());
        put("seed", self.noise.seed.to_string());
        put("carbon", self.carbon.to_string());
        out
    }
}
