use serde::{Deserialize, Serialize};

use super::DetectorTrace;
use crate::error::{Error, Result};

/// Minimum stream length for [`ber_and_mutual_info`].
pub const MIN_BITS: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct BitStream {
    pub bits: Vec<bool>,
    /// Empirical mean of the originating trace.
    pub threshold: f64,
    pub detector: String,
}

/// One bit per non-overlapping integration window: 1 iff the photocurrent
/// exceeds the trace mean. Values equal to the mean give 0, so a flat trace
/// is all zeros.
pub fn slice_bits(trace: &DetectorTrace) -> Result<BitStream> {
    if trace.is_empty() {
        return Err(Error::InsufficientData("empty detector trace".into()));
    }
    let threshold = trace.mean();
    let first = trace.samples[0];
    let flat = trace.samples.iter().all(|&y| y == first);
    let bits = trace
        .samples
        .iter()
        .step_by(trace.window_samples.max(1))
        .map(|&y| !flat && y > threshold)
        .collect();
    Ok(BitStream {
        bits,
        threshold,
        detector: trace.detector.clone(),
    })
}

/// `H2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitStats {
    pub bits: usize,
    pub ber: f64,
    /// `1 - H2(BER)`, binary-symmetric-channel mutual information.
    pub mi_bsc: f64,
    /// Plug-in estimate from the 2x2 joint histogram.
    pub mi_plugin: f64,
}

pub fn ber_and_mutual_info(a: &[bool], b: &[bool]) -> Result<BitStats> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < MIN_BITS {
        return Err(Error::InsufficientData(format!(
            "{} bits; at least {MIN_BITS} are needed",
            a.len()
        )));
    }
    let mut joint = [[0usize; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        joint[x as usize][y as usize] += 1;
    }
    let n = a.len() as f64;
    let ber = (joint[0][1] + joint[1][0]) as f64 / n;
    let pa = [(joint[0][0] + joint[0][1]) as f64 / n, (joint[1][0] + joint[1][1]) as f64 / n];
    let pb = [(joint[0][0] + joint[1][0]) as f64 / n, (joint[0][1] + joint[1][1]) as f64 / n];
    let mut mi_plugin = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let p = joint[x][y] as f64 / n;
            if p > 0.0 {
                mi_plugin += p * (p / (pa[x] * pb[y])).log2();
            }
        }
    }
    Ok(BitStats {
        bits: a.len(),
        ber,
        mi_bsc: 1.0 - binary_entropy(ber),
        mi_plugin: mi_plugin.max(0.0),
    })
}
