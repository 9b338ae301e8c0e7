use std::io::Write;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{derive_seed, label_stream, FieldTrace, SimConfig};
use crate::error::{Error, Result};
use crate::numfmt::format_significant;

/// Photocurrent of one detector: intensity averaged over the integration window.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorTrace {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    /// Integration window in samples.
    pub window_samples: usize,
    /// Source coherence time, carried along for error-bar block sizes.
    pub coherence_time: f64,
    pub detector: String,
}

impl DetectorTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn window(&self) -> f64 {
        self.window_samples as f64 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn slice(&self, range: Range<usize>) -> DetectorTrace {
        DetectorTrace {
            samples: self.samples[range].to_vec(),
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> DetectorTrace {
        DetectorTrace {
            samples: Vec::new(),
            sample_rate: self.sample_rate,
            window_samples: self.window_samples,
            coherence_time: self.coherence_time,
            detector: self.detector.clone(),
        }
    }

    /// `t,Y` rows; `t` is the end of each integration window.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,Y")?;
        let offset = (self.window_samples - 1) as f64;
        for (k, y) in self.samples.iter().enumerate() {
            writeln!(
                w,
                "{},{}",
                format_significant((k as f64 + offset) / self.sample_rate, 12),
                format_significant(*y, 12)
            )?;
        }
        Ok(())
    }
}

/// Rectangular moving average of `|E|²` over `window` samples, trailing.
fn windowed_intensity(trace: &FieldTrace, window: usize) -> Vec<f64> {
    let intensity = trace.intensities();
    if window == 1 {
        return intensity;
    }
    let mut out = Vec::with_capacity(intensity.len() + 1 - window);
    let anchor = window.max(4096);
    let mut sum: f64 = intensity[..window].iter().sum();
    out.push(sum / window as f64);
    for k in window..intensity.len() {
        sum += intensity[k] - intensity[k - window];
        // Re-anchor periodically so rounding cannot accumulate.
        if k % anchor == 0 {
            sum = intensity[k + 1 - window..=k].iter().sum();
        }
        out.push(sum / window as f64);
    }
    out
}

/// Detects a field with the photodiode described by `config`.
///
/// The output has `n - w + 1` samples for a window of `w` samples. Shot noise
/// replaces each value `Y` by `Poisson(s Y) / s` with `s` photoelectrons per
/// unit intensity; electronic noise is additive Gaussian.
pub fn detect(trace: &FieldTrace, config: &SimConfig, detector: &str) -> Result<DetectorTrace> {
    config.validate()?;
    let window = config.window_samples();
    if window > trace.len() {
        return Err(Error::InsufficientData(format!(
            "window of {window} samples exceeds trace of {}",
            trace.len()
        )));
    }
    let mut samples = windowed_intensity(trace, window);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.rng_seed, label_stream(detector)));
    if config.shot_noise {
        let scale = config.photons_per_unit;
        for y in samples.iter_mut() {
            let mean = scale * *y;
            *y = if mean > 0.0 {
                Poisson::new(mean)
                    .map_err(|e| Error::Config(format!("poisson mean {mean}: {e}")))?
                    .sample(&mut rng)
                    / scale
            } else {
                0.0
            };
        }
    }
    if config.electronic_noise_sd > 0.0 {
        let normal = Normal::new(0.0, config.electronic_noise_sd)
            .map_err(|e| Error::Config(e.to_string()))?;
        for y in samples.iter_mut() {
            *y += rng.sample(normal);
        }
    }
    Ok(DetectorTrace {
        samples,
        sample_rate: trace.sample_rate,
        window_samples: window,
        coherence_time: config.coherence_time,
        detector: detector.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{generate_field, Regime};

    #[test]
    fn single_sample_window_is_raw_intensity() {
        let cfg = SimConfig { duration: 1e-5, ..Default::default() };
        let f = generate_field(&cfg).unwrap();
        let d = detect(&f, &cfg, "alice").unwrap();
        assert_eq!(d.samples, f.intensities());
        assert_eq!(d.window_samples, 1);
    }

    #[test]
    fn moving_average_matches_direct_sum() {
        let cfg = SimConfig { duration: 1e-4, detector_window: 3.7e-7, ..Default::default() };
        let f = generate_field(&cfg).unwrap();
        let d = detect(&f, &cfg, "alice").unwrap();
        let w = 37;
        let i = f.intensities();
        assert_eq!(d.len(), f.len() - w + 1);
        for k in [0, 1, 500, 4095, 4096, 9000, d.len() - 1] {
            let direct: f64 = i[k..k + w].iter().sum::<f64>() / w as f64;
            assert!((direct - d.samples[k]).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn window_longer_than_trace_fails() {
        let cfg = SimConfig { duration: 1e-7, detector_window: 1e-7, ..Default::default() };
        let f = generate_field(&cfg).unwrap();
        let long = SimConfig { detector_window: 1e-6, ..cfg };
        assert!(detect(&f, &long, "a").is_err());
    }

    #[test]
    fn electronic_noise_spread() {
        let cfg = SimConfig {
            regime: Regime::Coherent,
            electronic_noise_sd: 0.2,
            duration: 1e-3,
            ..Default::default()
        };
        let f = generate_field(&cfg).unwrap();
        let d = detect(&f, &cfg, "bob").unwrap();
        let mean = d.mean();
        let var = d.samples.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / d.len() as f64;
        assert!((mean - 1.0).abs() < 0.01);
        assert!((var.sqrt() - 0.2).abs() < 0.01);
    }

    #[test]
    fn detectors_draw_independent_noise() {
        let cfg = SimConfig { regime: Regime::Coherent, shot_noise: true, duration: 1e-5, ..Default::default() };
        let f = generate_field(&cfg).unwrap();
        let a = detect(&f, &cfg, "alice").unwrap();
        let b = detect(&f, &cfg, "bob").unwrap();
        assert_ne!(a.samples, b.samples);
        assert_eq!(a, detect(&f, &cfg, "alice").unwrap());
    }

    #[test]
    fn csv_export() {
        let d = DetectorTrace {
            samples: vec![1.0, 0.5],
            sample_rate: 1e6,
            window_samples: 2,
            coherence_time: 1e-5,
            detector: "a".into(),
        };
        let mut out = Vec::new();
        d.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "t,Y\n1e-6,1\n2e-6,0.5\n");
    }
}
