//! Flat `key = value` configuration with `#` comments.
//!
//! Later sources override earlier ones: a config file is read first, then
//! every `--set key=value` from the command line.

use std::collections::BTreeMap;
use std::path::Path;

use thermal_qkd::network::{db_to_transmittance, ProtocolParams};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected `key = value`, got {raw:?}", lineno + 1))
            })?;
            config.insert(key, value)?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    fn insert(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Usage("empty configuration key".into()));
        }
        self.entries.insert(key.to_ascii_lowercase(), value.trim().to_string());
        Ok(())
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override {o:?} is not key=value")))?;
            self.insert(key, value)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Errors on any key outside `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(CliError::Usage(format!("unknown configuration key {k:?}"))),
            None => Ok(()),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("{key}: {v:?} is not a non-negative integer")))
            })
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("{key}: {v:?} is not a 64-bit unsigned integer")))
            })
            .transpose()
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "on" | "true" | "yes" | "1" => Ok(true),
                "off" | "false" | "no" | "0" => Ok(false),
                _ => Err(CliError::Usage(format!("{key}: {v:?} is not on/off"))),
            })
            .transpose()
    }

    pub fn transmittance(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_transmittance(key, v)).transpose()
    }
}

pub fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("{key}: {value:?} is not a finite number")))
}

/// A plain fraction, or a power ratio in decibels with a `dB` suffix.
pub fn parse_transmittance(key: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    let lower = v.to_ascii_lowercase();
    match lower.strip_suffix("db") {
        Some(db) => Ok(db_to_transmittance(parse_f64(key, db)?)),
        None => parse_f64(key, v),
    }
}

/// Keys that set fields of [`ProtocolParams`]. `v_s` sets both source
/// quadratures and `n_det` both detector noises.
pub const PROTOCOL_KEYS: &[&str] = &[
    "eta1", "eta2", "eta4", "epsilon", "v_s", "v_s_x", "v_s_p", "v_e", "n_a", "n_b", "n_det",
];

pub fn set_protocol_value(params: &mut ProtocolParams, key: &str, value: f64) -> Result<()> {
    match key {
        "eta1" => params.eta1 = value,
        "eta2" => params.eta2 = value,
        "eta4" => params.eta4 = value,
        "epsilon" => params.epsilon = value,
        "v_s" => {
            params.v_s_x = value;
            params.v_s_p = value;
        }
        "v_s_x" => params.v_s_x = value,
        "v_s_p" => params.v_s_p = value,
        "v_e" => params.v_e = value,
        "n_a" => params.n_a = value,
        "n_b" => params.n_b = value,
        "n_det" => {
            params.n_a = value;
            params.n_b = value;
        }
        other => return Err(CliError::Usage(format!("{other:?} is not a protocol parameter"))),
    }
    Ok(())
}

/// Overlays every protocol key present in `config` onto `base`.
pub fn protocol_params(config: &Config, base: ProtocolParams) -> Result<ProtocolParams> {
    let mut params = base;
    // v_s and n_det first so the per-quadrature and per-party keys win.
    for key in ["v_s", "n_det", "eta1", "eta2", "eta4", "epsilon", "v_s_x", "v_s_p", "v_e", "n_a", "n_b"] {
        let value = if key.starts_with("eta") {
            config.transmittance(key)?
        } else {
            config.f64(key)?
        };
        if let Some(v) = value {
            set_protocol_value(&mut params, key, v)?;
        }
    }
    Ok(params)
}
