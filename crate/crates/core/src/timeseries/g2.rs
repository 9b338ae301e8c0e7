use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DetectorTrace;
use crate::error::{Error, Result};

/// Minimum number of bootstrap blocks.
pub const MIN_BLOCKS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct G2Options {
    /// Largest lag, seconds.
    pub max_lag: f64,
    /// Number of lags between 0 and `max_lag` inclusive.
    pub lag_count: usize,
    /// Bootstrap block length in seconds; `None` uses `5 max(τc, T_int)`,
    /// shortened when the overlap holds fewer than [`MIN_BLOCKS`] of those.
    pub block_length: Option<f64>,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for G2Options {
    fn default() -> Self {
        Self {
            max_lag: 0.0,
            lag_count: 1,
            block_length: None,
            resamples: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Estimate {
    /// seconds
    pub lags: Vec<f64>,
    pub g2: Vec<f64>,
    /// Block-bootstrap standard errors.
    pub stderr: Vec<f64>,
    pub zero_lag: f64,
    pub zero_lag_stderr: f64,
}

fn lag_grid(max_lag: usize, count: usize) -> Vec<usize> {
    if count <= 1 || max_lag == 0 {
        return vec![0];
    }
    let mut lags: Vec<usize> = (0..count)
        .map(|i| ((i as f64) * max_lag as f64 / (count - 1) as f64).round() as usize)
        .collect();
    lags.dedup();
    lags
}

/// `g2(τ) = <Ya(t) Yb(t+τ)> / (<Ya> <Yb>)` over the overlap of both traces.
///
/// Error bars come from a moving-block bootstrap: the overlap is cut into at
/// least [`MIN_BLOCKS`] contiguous blocks, which are resampled with
/// replacement `resamples` times.
pub fn estimate_g2(a: &DetectorTrace, b: &DetectorTrace, options: &G2Options) -> Result<G2Estimate> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.sample_rate != b.sample_rate {
        return Err(Error::Config("traces are sampled at different rates".into()));
    }
    let n = a.len();
    let rate = a.sample_rate;
    if !(options.max_lag >= 0.0) || options.max_lag >= a.duration() / 10.0 {
        return Err(Error::Config(format!(
            "max_lag {} s must be below a tenth of the trace ({} s)",
            options.max_lag,
            a.duration()
        )));
    }
    for trace in [a, b] {
        let mean = trace.mean();
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::DeadDetector(trace.detector.clone()));
        }
    }

    let max_lag = (options.max_lag * rate).round() as usize;
    let lags = lag_grid(max_lag, options.lag_count);
    let block = match options.block_length {
        Some(seconds) => ((seconds * rate).round() as usize).max(1),
        None => {
            let preferred = (5.0 * a.coherence_time.max(a.window()) * rate).round() as usize;
            preferred.min((n - max_lag) / MIN_BLOCKS).max(1)
        }
    };
    let blocks = (n - max_lag) / block;
    if blocks < MIN_BLOCKS {
        return Err(Error::InsufficientData(format!(
            "{blocks} bootstrap blocks of {block} samples; need {MIN_BLOCKS}"
        )));
    }
    let used = blocks * block;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let replicates: Vec<Vec<usize>> = (0..options.resamples)
        .map(|_| (0..blocks).map(|_| rng.random_range(0..blocks)).collect())
        .collect();

    let ratio = |ab: f64, sa: f64, sb: f64, count: f64| (ab / count) / ((sa / count) * (sb / count));

    let mut g2 = Vec::with_capacity(lags.len());
    let mut stderr = Vec::with_capacity(lags.len());
    for &lag in &lags {
        let ya = &a.samples[..used];
        let yb = &b.samples[lag..lag + used];
        let sums: Vec<[f64; 3]> = ya
            .chunks_exact(block)
            .zip(yb.chunks_exact(block))
            .map(|(ca, cb)| {
                let mut s = [0.0; 3];
                for (&x, &y) in ca.iter().zip(cb) {
                    s[0] += x * y;
                    s[1] += x;
                    s[2] += y;
                }
                s
            })
            .collect();
        let total = sums.iter().fold([0.0; 3], |acc, s| [acc[0] + s[0], acc[1] + s[1], acc[2] + s[2]]);
        g2.push(ratio(total[0], total[1], total[2], used as f64));

        let boot: Vec<f64> = replicates
            .iter()
            .map(|picks| {
                let t = picks.iter().fold([0.0; 3], |acc, &j| {
                    [acc[0] + sums[j][0], acc[1] + sums[j][1], acc[2] + sums[j][2]]
                });
                ratio(t[0], t[1], t[2], used as f64)
            })
            .collect();
        stderr.push(sample_sd(&boot));
    }

    Ok(G2Estimate {
        lags: lags.iter().map(|&l| l as f64 / rate).collect(),
        zero_lag: g2[0],
        zero_lag_stderr: stderr[0],
        g2,
        stderr,
    })
}

fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Thermal,
    NotThermal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalityReport {
    pub verdict: Verdict,
    pub g2_zero: f64,
    pub stderr: f64,
    pub threshold_sigmas: f64,
}

/// Bunching check on a chunk shared by two detectors (or one detector twice):
/// thermal iff `g2(0) - 1 > k stderr`.
///
/// The chunk must span at least ten coherence times; bootstrap blocks are
/// `min(5 τc, chunk / 20)` long.
pub fn thermality_test(
    a: &DetectorTrace,
    b: &DetectorTrace,
    chunk: Range<usize>,
    threshold_sigmas: f64,
    seed: u64,
) -> Result<ThermalityReport> {
    if chunk.end > a.len().min(b.len()) || chunk.is_empty() {
        return Err(Error::InsufficientData(format!(
            "chunk {chunk:?} outside traces of {} samples",
            a.len().min(b.len())
        )));
    }
    let length = chunk.len() as f64 / a.sample_rate;
    if length < 10.0 * a.coherence_time {
        return Err(Error::InsufficientData(format!(
            "chunk of {length} s is shorter than ten coherence times"
        )));
    }
    let options = G2Options {
        block_length: Some((5.0 * a.coherence_time).min(length / MIN_BLOCKS as f64)),
        seed,
        ..Default::default()
    };
    let est = estimate_g2(&a.slice(chunk.clone()), &b.slice(chunk), &options)?;
    let verdict = if est.zero_lag - 1.0 > threshold_sigmas * est.zero_lag_stderr {
        Verdict::Thermal
    } else {
        Verdict::NotThermal
    };
    Ok(ThermalityReport {
        verdict,
        g2_zero: est.zero_lag,
        stderr: est.zero_lag_stderr,
        threshold_sigmas,
    })
}
