use std::io::{Read, Write};
use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{derive_seed, Regime, SimConfig};
use crate::error::{check_domain, Error, Result};

pub const TRACE_MAGIC: &[u8; 8] = b"THRMTRC1";
const HEADER_LEN: usize = 32;

/// Complex field amplitude sampled on a uniform grid; `|E|²` is intensity.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTrace {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    /// Seed of the run that produced the trace (recorded in dumps).
    pub seed: u64,
}

impl FieldTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.samples.iter().map(|e| e.norm_sqr()).collect()
    }

    pub fn slice(&self, range: Range<usize>) -> FieldTrace {
        FieldTrace {
            samples: self.samples[range].to_vec(),
            sample_rate: self.sample_rate,
            seed: self.seed,
        }
    }
}

/// Circularly symmetric complex normal with `E|z|² = variance`.
fn complex_normal<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Samples the source field.
///
/// Thermal light is a stationary complex Ornstein–Uhlenbeck process with
/// `<E*(t) E(t+τ)> = I0 exp(-|τ|/τc)`, updated with the exact discrete
/// transition so the autocorrelation holds at every grid lag. Coherent light
/// is the constant amplitude `√I0`.
pub fn generate_field(config: &SimConfig) -> Result<FieldTrace> {
    config.validate()?;
    let n = config.sample_count();
    let i0 = config.mean_intensity;
    let samples = match config.regime {
        Regime::Coherent => vec![Complex64::new(i0.sqrt(), 0.0); n],
        Regime::Thermal => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.rng_seed, 0));
            let decay = (-1.0 / config.coherence_samples()).exp();
            let innovation = i0 * (1.0 - decay * decay);
            let mut e = complex_normal(&mut rng, i0);
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                out.push(e);
                e = e * decay + complex_normal(&mut rng, innovation);
            }
            out
        }
    };
    Ok(FieldTrace {
        samples,
        sample_rate: config.sample_rate,
        seed: config.rng_seed,
    })
}

/// Field entering a beamsplitter's unused port.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VacuumInput {
    /// Classical-intensity idealisation: nothing enters.
    Off,
    /// White complex Gaussian noise of the given mean intensity per sample.
    Gaussian { intensity: f64 },
}

/// Splits a field at transmittance `eta`; returns `(reflected, transmitted)`.
///
/// `t = √η E + √(1-η) E_vac`, `r = √(1-η) E - √η E_vac`.
pub fn split_field(
    trace: &FieldTrace,
    eta: f64,
    vacuum: VacuumInput,
    seed: u64,
) -> Result<(FieldTrace, FieldTrace)> {
    check_domain("eta", eta, (0.0..=1.0).contains(&eta), "[0, 1]")?;
    let t = eta.sqrt();
    let r = (1.0 - eta).sqrt();
    let n = trace.len();
    let mut reflected = Vec::with_capacity(n);
    let mut transmitted = Vec::with_capacity(n);
    match vacuum {
        VacuumInput::Off => {
            for &e in &trace.samples {
                reflected.push(e * r);
                transmitted.push(e * t);
            }
        }
        VacuumInput::Gaussian { intensity } => {
            check_domain("vacuum intensity", intensity, intensity >= 0.0, ">= 0")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for &e in &trace.samples {
                let v = complex_normal(&mut rng, intensity);
                reflected.push(e * r - v * t);
                transmitted.push(e * t + v * r);
            }
        }
    }
    let wrap = |samples| FieldTrace {
        samples,
        sample_rate: trace.sample_rate,
        seed: trace.seed,
    };
    Ok((wrap(reflected), wrap(transmitted)))
}

/// Aligns two arms when the second travels `delay` samples further: the
/// returned second trace at index `k` carries the field emitted `delay`
/// samples before the first trace's field at `k`. Both come back with
/// length `n - delay`.
pub fn apply_path_delay(
    first: &FieldTrace,
    second: &FieldTrace,
    delay: usize,
) -> Result<(FieldTrace, FieldTrace)> {
    if first.len() != second.len() {
        return Err(Error::Dimension {
            expected: first.len(),
            found: second.len(),
        });
    }
    if delay >= first.len() {
        return Err(Error::InsufficientData(format!(
            "delay of {delay} samples exceeds trace of {}",
            first.len()
        )));
    }
    let n = first.len();
    Ok((first.slice(delay..n), second.slice(0..n - delay)))
}

/// Writes the 32-byte header (magic, sample rate, duration, seed) and the
/// samples as little-endian `f64` pairs `(re, im)`.
pub fn write_field_trace<W: Write>(mut w: W, trace: &FieldTrace) -> Result<()> {
    w.write_all(TRACE_MAGIC)?;
    w.write_all(&trace.sample_rate.to_le_bytes())?;
    w.write_all(&trace.duration().to_le_bytes())?;
    w.write_all(&trace.seed.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * trace.len().min(1 << 16));
    for chunk in trace.samples.chunks(1 << 16) {
        buf.clear();
        for e in chunk {
            buf.extend_from_slice(&e.re.to_le_bytes());
            buf.extend_from_slice(&e.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_field_trace<R: Read>(mut r: R) -> Result<FieldTrace> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &header[..8] != TRACE_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |k: usize| -> [u8; 8] { header[8 * k..8 * k + 8].try_into().expect("8 bytes") };
    let sample_rate = f64::from_le_bytes(word(1));
    let duration = f64::from_le_bytes(word(2));
    let seed = u64::from_le_bytes(word(3));
    if !(sample_rate > 0.0 && duration >= 0.0) {
        return Err(Error::Format(format!(
            "invalid sample rate {sample_rate} or duration {duration}"
        )));
    }
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 16 != 0 {
        return Err(Error::Format("body is not a whole number of samples".into()));
    }
    let samples: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    let expected = (duration * sample_rate).round() as usize;
    if expected != samples.len() {
        return Err(Error::Format(format!(
            "header announces {expected} samples, body holds {}",
            samples.len()
        )));
    }
    Ok(FieldTrace {
        samples,
        sample_rate,
        seed,
    })
}
