use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thermal_qkd::metrics::MetricsReport;
use thermal_qkd::network::ProtocolParams;

use crate::config::{self, Config};
use crate::error::{CliError, Result};
use crate::table;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(CliError::Usage(format!("unknown spacing {other:?}; use linear or log"))),
        }
    }
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        })
    }
}

/// One-dimensional sweep over a protocol parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub fixed: ProtocolParams,
    pub seed: u64,
}

/// Keys a sweep configuration may contain besides the protocol parameters.
pub const SWEEP_KEYS: &[&str] = &["param", "min", "max", "count", "spacing", "seed"];

impl SweepSpec {
    pub fn from_config(config: &Config, seed: Option<u64>) -> Result<Self> {
        let known: Vec<&str> = SWEEP_KEYS.iter().chain(config::PROTOCOL_KEYS).copied().collect();
        config.reject_unknown(&known)?;
        let parameter = config
            .get("param")
            .ok_or_else(|| CliError::Usage("sweep needs `param`".into()))?
            .to_ascii_lowercase();
        let bound = |key: &str| -> Result<f64> {
            let v = config
                .get(key)
                .ok_or_else(|| CliError::Usage(format!("sweep needs `{key}`")))?;
            if parameter.starts_with("eta") {
                config::parse_transmittance(key, v)
            } else {
                config::parse_f64(key, v)
            }
        };
        let spec = SweepSpec {
            min: bound("min")?,
            max: bound("max")?,
            count: config.usize("count")?.ok_or_else(|| CliError::Usage("sweep needs `count`".into()))?,
            spacing: config.get("spacing").map(str::parse).transpose()?.unwrap_or(Spacing::Linear),
            fixed: config::protocol_params(config, ProtocolParams::default())?,
            seed: seed.or(config.u64("seed")?).unwrap_or(0),
            parameter,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !config::PROTOCOL_KEYS.contains(&self.parameter.as_str()) {
            return Err(CliError::Usage(format!("{:?} cannot be swept", self.parameter)));
        }
        if self.count < 2 {
            return Err(CliError::Usage(format!("count must be at least 2, got {}", self.count)));
        }
        if !(self.min < self.max) {
            return Err(CliError::Usage(format!(
                "sweep needs min < max, got {} and {}",
                self.min, self.max
            )));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(CliError::Usage("log spacing needs a positive minimum".into()));
        }
        for p in self.points()? {
            p.validate()?;
            p.noise_variance()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    return self.max;
                }
                let t = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }

    pub fn points(&self) -> Result<Vec<ProtocolParams>> {
        self.grid()
            .into_iter()
            .map(|v| {
                let mut p = self.fixed;
                config::set_protocol_value(&mut p, &self.parameter, v)?;
                Ok(p)
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        format!(
            "sweep {} {} from {} to {} count={}",
            self.parameter,
            self.spacing,
            table::num(self.min),
            table::num(self.max),
            self.count
        )
    }

    pub fn run(&self) -> Result<Vec<MetricsReport>> {
        evaluate_all(&self.points()?)
    }
}

/// Evaluates every point in parallel; results keep the input order.
pub fn evaluate_all(points: &[ProtocolParams]) -> Result<Vec<MetricsReport>> {
    points
        .par_iter()
        .map(|p| MetricsReport::evaluate(p).map_err(CliError::from))
        .collect()
}
