//! Monte-Carlo model of the intensity-correlation experiment.
//!
//! A complex field is sampled on a uniform grid (an Ornstein–Uhlenbeck
//! process for chaotic light, a constant for laser light), split by
//! beamsplitters, detected by finite-bandwidth photodiodes and finally
//! analysed for `g2(τ)` and sliced into bits.

mod bits;
mod detect;
mod experiment;
mod field;
mod g2;

pub use bits::{ber_and_mutual_info, binary_entropy, slice_bits, BitStats, BitStream};
pub use detect::{detect, DetectorTrace};
pub use experiment::{
    detect_network, propagate_network, run_network, NetworkConfig, NetworkFields, NetworkTraces,
};
pub use field::{
    apply_path_delay, generate_field, read_field_trace, split_field, write_field_trace,
    FieldTrace, VacuumInput, TRACE_MAGIC,
};
pub use g2::{estimate_g2, thermality_test, G2Estimate, G2Options, ThermalityReport, Verdict};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Thermal,
    Coherent,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "thermal" => Ok(Regime::Thermal),
            "coherent" => Ok(Regime::Coherent),
            other => Err(Error::Config(format!("unknown regime {other:?}"))),
        }
    }
}

/// Source, detector and randomness settings of one simulated run. Times in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// samples/s
    pub sample_rate: f64,
    pub duration: f64,
    pub coherence_time: f64,
    pub mean_intensity: f64,
    pub regime: Regime,
    /// Photodiode integration window `T_int`.
    pub detector_window: f64,
    pub electronic_noise_sd: f64,
    pub shot_noise: bool,
    /// Mean photoelectrons per unit of windowed intensity.
    pub photons_per_unit: f64,
    pub rng_seed: u64,
    /// Extra path length of Bob's arm relative to Alice's, as a time.
    pub path_delay: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sample_rate: 1e8,
            duration: 1e-2,
            coherence_time: 1e-6,
            mean_intensity: 1.0,
            regime: Regime::Thermal,
            detector_window: 1e-8,
            electronic_noise_sd: 0.0,
            shot_noise: false,
            photons_per_unit: 100.0,
            rng_seed: 1,
            path_delay: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sample_rate", self.sample_rate),
            ("duration", self.duration),
            ("coherence_time", self.coherence_time),
            ("mean_intensity", self.mean_intensity),
            ("detector_window", self.detector_window),
            ("photons_per_unit", self.photons_per_unit),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.electronic_noise_sd >= 0.0) || !(self.path_delay >= 0.0) {
            return Err(Error::Config(
                "electronic_noise_sd and path_delay must be non-negative".into(),
            ));
        }
        if self.sample_rate * self.coherence_time < 10.0 * (1.0 - 1e-9) {
            return Err(Error::Config(format!(
                "coherence time spans {:.3} samples; at least 10 are needed",
                self.sample_rate * self.coherence_time
            )));
        }
        if self.detector_window * self.sample_rate < 1.0 - 1e-9 {
            return Err(Error::Config(
                "detector window is shorter than one sample".into(),
            ));
        }
        if self.sample_count() < 2 {
            return Err(Error::Config("trace needs at least two samples".into()));
        }
        if self.delay_samples() >= self.sample_count() {
            return Err(Error::Config("path delay exceeds the trace".into()));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn window_samples(&self) -> usize {
        ((self.detector_window * self.sample_rate).round() as usize).max(1)
    }

    pub fn delay_samples(&self) -> usize {
        (self.path_delay * self.sample_rate).round() as usize
    }

    pub fn coherence_samples(&self) -> f64 {
        self.coherence_time * self.sample_rate
    }
}

/// Independent sub-seed for stream `stream` of a run seeded with `master` (SplitMix64 finaliser).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash, used to give each named detector its own stream.
pub(crate) fn label_stream(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
