//! `timeseries` and `g2` commands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thermal_qkd::timeseries::{
    ber_and_mutual_info, detect, detect_network, estimate_g2, propagate_network, read_field_trace,
    slice_bits, thermality_test, write_field_trace, BitStats, DetectorTrace, G2Estimate, G2Options,
    NetworkConfig, Regime, SimConfig, ThermalityReport, VacuumInput,
};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::table::{self, num};

pub const TIMESERIES_KEYS: &[&str] = &[
    "sample_rate",
    "duration",
    "coherence_time",
    "mean_intensity",
    "regime",
    "detector_window",
    "electronic_noise_sd",
    "shot_noise",
    "photons_per_unit",
    "path_delay",
    "seed",
    "eta1",
    "eta2",
    "eta4",
    "vacuum",
    "max_lag",
    "lag_count",
    "resamples",
    "block_length",
    "threshold_sigmas",
    "chunk",
    "dump_traces",
    "trace_csv",
];

/// Everything a `timeseries` run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub network: NetworkConfig,
    pub g2: G2Options,
    pub threshold_sigmas: f64,
    /// Length of the thermality-check chunk, s.
    pub chunk: f64,
    pub dump_traces: bool,
    pub trace_csv: bool,
}

impl ExperimentSpec {
    pub fn from_config(config: &Config, seed: Option<u64>) -> Result<Self> {
        config.reject_unknown(TIMESERIES_KEYS)?;
        let d = SimConfig::default();
        let f = |key: &str, default: f64| -> Result<f64> { Ok(config.f64(key)?.unwrap_or(default)) };
        let sim = SimConfig {
            sample_rate: f("sample_rate", d.sample_rate)?,
            duration: f("duration", d.duration)?,
            coherence_time: f("coherence_time", d.coherence_time)?,
            mean_intensity: f("mean_intensity", d.mean_intensity)?,
            regime: config.get("regime").map(str::parse::<Regime>).transpose()?.unwrap_or(d.regime),
            detector_window: f("detector_window", d.detector_window)?,
            electronic_noise_sd: f("electronic_noise_sd", d.electronic_noise_sd)?,
            shot_noise: config.bool("shot_noise")?.unwrap_or(d.shot_noise),
            photons_per_unit: f("photons_per_unit", d.photons_per_unit)?,
            rng_seed: seed.or(config.u64("seed")?).unwrap_or(d.rng_seed),
            path_delay: f("path_delay", d.path_delay)?,
        };
        sim.validate()?;
        let vacuum = match config.get("vacuum").map(str::to_ascii_lowercase).as_deref() {
            None | Some("off") => VacuumInput::Off,
            Some(v) => VacuumInput::Gaussian {
                intensity: crate::config::parse_f64("vacuum", v)?,
            },
        };
        let eta = |key: &str, default: f64| -> Result<f64> {
            Ok(config.transmittance(key)?.unwrap_or(default))
        };
        // Half of the broadcast goes to Eve by default so every detector sees light.
        let net = NetworkConfig {
            eta2: 0.5,
            ..NetworkConfig::default()
        };
        let network = NetworkConfig {
            eta1: eta("eta1", net.eta1)?,
            eta2: eta("eta2", net.eta2)?,
            eta4: eta("eta4", net.eta4)?,
            vacuum,
            sim,
        };
        let g2 = G2Options {
            max_lag: f("max_lag", 5.0 * network.sim.coherence_time)?,
            lag_count: config.usize("lag_count")?.unwrap_or(51),
            block_length: config.f64("block_length")?,
            resamples: config.usize("resamples")?.unwrap_or(200),
            seed: network.sim.rng_seed,
        };
        Ok(ExperimentSpec {
            chunk: f("chunk", (100.0 * network.sim.coherence_time).min(network.sim.duration / 2.0))?,
            threshold_sigmas: f("threshold_sigmas", 3.0)?,
            dump_traces: config.bool("dump_traces")?.unwrap_or(false),
            trace_csv: config.bool("trace_csv")?.unwrap_or(false),
            network,
            g2,
        })
    }

    pub fn echo(&self) -> String {
        let s = &self.network.sim;
        let vacuum = match self.network.vacuum {
            VacuumInput::Off => "off".to_string(),
            VacuumInput::Gaussian { intensity } => num(intensity),
        };
        format!(
            "sample_rate={} duration={} coherence_time={} mean_intensity={} regime={} detector_window={} \
             electronic_noise_sd={} shot_noise={} photons_per_unit={} path_delay={} eta1={} eta2={} eta4={} \
             vacuum={vacuum} max_lag={} lag_count={} resamples={} threshold_sigmas={} chunk={}",
            num(s.sample_rate),
            num(s.duration),
            num(s.coherence_time),
            num(s.mean_intensity),
            match s.regime {
                Regime::Thermal => "thermal",
                Regime::Coherent => "coherent",
            },
            num(s.detector_window),
            num(s.electronic_noise_sd),
            if s.shot_noise { "on" } else { "off" },
            num(s.photons_per_unit),
            num(s.path_delay),
            num(self.network.eta1),
            num(self.network.eta2),
            num(self.network.eta4),
            num(self.g2.max_lag),
            self.g2.lag_count,
            self.g2.resamples,
            num(self.threshold_sigmas),
            num(self.chunk),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub pair: String,
    pub g2_zero: f64,
    pub g2_zero_stderr: f64,
    pub bits: BitStats,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub pairs: Vec<(String, G2Estimate)>,
    pub reports: Vec<PairReport>,
    pub thermality: ThermalityReport,
    pub traces: Vec<DetectorTrace>,
}

impl ExperimentOutcome {
    pub fn pair(&self, name: &str) -> Option<&PairReport> {
        self.reports.iter().find(|r| r.pair == name)
    }
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Runs the network, writing field dumps into `dump_dir` when requested.
pub fn run_experiment(spec: &ExperimentSpec, dump_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    let fields = propagate_network(&spec.network)?;
    if let (true, Some(dir)) = (spec.dump_traces, dump_dir) {
        for (name, field) in [("alice", &fields.alice), ("bob", &fields.bob), ("eve", &fields.eve)] {
            let path = dir.join(format!("{name}.trc"));
            let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
            write_field_trace(BufWriter::new(file), field)?;
        }
    }
    let t = detect_network(&fields, &spec.network.sim)?;
    drop(fields);
    let traces = vec![t.alice, t.bob, t.eve];

    let bits = traces
        .iter()
        .map(|tr| slice_bits(tr).map(|b| b.bits))
        .collect::<thermal_qkd::Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    let mut reports = Vec::new();
    for (i, j) in PAIRS {
        let name = format!("{}-{}", traces[i].detector, traces[j].detector);
        let est = estimate_g2(&traces[i], &traces[j], &spec.g2)?;
        reports.push(PairReport {
            pair: name.clone(),
            g2_zero: est.zero_lag,
            g2_zero_stderr: est.zero_lag_stderr,
            bits: ber_and_mutual_info(&bits[i], &bits[j])?,
        });
        pairs.push((name, est));
    }
    let chunk = ((spec.chunk * spec.network.sim.sample_rate).round() as usize).min(traces[0].len());
    let thermality = thermality_test(
        &traces[0],
        &traces[1],
        0..chunk,
        spec.threshold_sigmas,
        spec.network.sim.rng_seed,
    )?;
    Ok(ExperimentOutcome {
        pairs,
        reports,
        thermality,
        traces,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn write_g2_csv<W: Write>(mut w: W, seed: u64, echo: &str, pairs: &[(String, G2Estimate)]) -> std::io::Result<()> {
    writeln!(w, "# {} {} seed={seed}", table::TOOL, table::VERSION)?;
    writeln!(w, "# {echo}")?;
    writeln!(w, "pair,lag_s,g2,stderr")?;
    for (name, est) in pairs {
        for k in 0..est.lags.len() {
            writeln!(w, "{name},{},{},{}", num(est.lags[k]), num(est.g2[k]), num(est.stderr[k]))?;
        }
    }
    w.flush()
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ReportLine<'a> {
    Run {
        tool: &'static str,
        version: &'static str,
        seed: u64,
        config: &'a str,
        samples: usize,
    },
    Pair(&'a PairReport),
    Thermality(&'a ThermalityReport),
}

/// Writes `g2.csv`, `report.jsonl` and optional dumps into `dir`.
pub fn write_outputs(spec: &ExperimentSpec, outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let seed = spec.network.sim.rng_seed;
    let echo = spec.echo();
    let mut written = Vec::new();

    let path = dir.join("g2.csv");
    write_g2_csv(create(&path)?, seed, &echo, &outcome.pairs).map_err(|e| CliError::io(&path, e))?;
    written.push(path);

    let path = dir.join("report.jsonl");
    let mut w = create(&path)?;
    let mut lines = vec![ReportLine::Run {
        tool: table::TOOL,
        version: table::VERSION,
        seed,
        config: &echo,
        samples: outcome.traces[0].len(),
    }];
    lines.extend(outcome.reports.iter().map(ReportLine::Pair));
    lines.push(ReportLine::Thermality(&outcome.thermality));
    for line in &lines {
        let json = serde_json::to_string(line).map_err(|e| CliError::Usage(e.to_string()))?;
        writeln!(w, "{json}").map_err(|e| CliError::io(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    written.push(path);

    if spec.trace_csv {
        for t in &outcome.traces {
            let path = dir.join(format!("{}_trace.csv", t.detector));
            t.write_csv(create(&path)?)?;
            written.push(path);
        }
    }
    if spec.dump_traces {
        written.extend(["alice", "bob", "eve"].iter().map(|n| dir.join(format!("{n}.trc"))));
    }
    Ok(written)
}

pub fn timeseries(spec: &ExperimentSpec, dir: &Path) -> Result<(ExperimentOutcome, Vec<PathBuf>)> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let outcome = run_experiment(spec, Some(dir))?;
    let written = write_outputs(spec, &outcome, dir)?;
    Ok((outcome, written))
}

/// Options of the `g2` command, which re-detects two dumped fields.
#[derive(Clone, Debug, PartialEq)]
pub struct DumpG2 {
    pub first: PathBuf,
    pub second: PathBuf,
    pub detector_window: f64,
    pub coherence_time: f64,
    pub options: G2Options,
}

pub fn g2_from_dumps(args: &DumpG2) -> Result<G2Estimate> {
    let read = |path: &Path| {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        read_field_trace(std::io::BufReader::new(file)).map_err(CliError::from)
    };
    let (a, b) = (read(&args.first)?, read(&args.second)?);
    if a.sample_rate != b.sample_rate || a.len() != b.len() {
        return Err(CliError::Usage("dumps differ in sample rate or length".into()));
    }
    let sim = SimConfig {
        sample_rate: a.sample_rate,
        duration: a.duration(),
        coherence_time: args.coherence_time,
        detector_window: args.detector_window,
        rng_seed: a.seed,
        ..SimConfig::default()
    };
    let ya = detect(&a, &sim, "first")?;
    let yb = detect(&b, &sim, "second")?;
    Ok(estimate_g2(&ya, &yb, &args.options)?)
}
