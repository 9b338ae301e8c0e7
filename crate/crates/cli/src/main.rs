use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermal_qkd::metrics::eve_energy_bounds;
use thermal_qkd::timeseries::G2Options;
use thermal_qkd_cli::config::Config;
use thermal_qkd_cli::experiment::{self, DumpG2, ExperimentSpec};
use thermal_qkd_cli::figures::{self, Preset};
use thermal_qkd_cli::sweep::SweepSpec;
use thermal_qkd_cli::table::{self, num};
use thermal_qkd_cli::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "thermal-qkd", version, about = "Central-broadcast key distribution with thermal light")]
struct Cli {
    /// Flat `key = value` file; `--set` entries override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (metrics-sweep, g2) or directory (figure, timeseries).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parameter grids.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep one protocol parameter and tabulate every metric.
    MetricsSweep {
        /// key=value, e.g. `param=eta2`, `count=50`, `eta4=-7dB`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Regenerate the data behind one figure.
    Figure {
        preset: String,
        /// Evaluate without the unit of detector noise at Alice and Bob.
        #[arg(long)]
        no_detector_noise: bool,
    },
    /// Simulate the optical experiment and analyse the detector traces.
    Timeseries {
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Cross-correlation of two dumped field traces.
    G2 {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        detector_window: f64,
        #[arg(long, default_value_t = 1e-6)]
        coherence_time: f64,
        #[arg(long, default_value_t = 5e-6)]
        max_lag: f64,
        #[arg(long, default_value_t = 51)]
        lags: usize,
        #[arg(long)]
        block_length: Option<f64>,
    },
    /// Energy-time bounds on an intercept-and-resend attacker.
    EveBounds {
        /// Coherence time, s.
        #[arg(long, allow_negative_numbers = true)]
        tau_c: f64,
        /// Photon energy, eV.
        #[arg(long, allow_negative_numbers = true)]
        photon_energy: f64,
        #[arg(long)]
        json: bool,
    },
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut config = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    config.apply_overrides(overrides)?;
    Ok(config)
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn out_label(out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<stdout>"))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::MetricsSweep { set } => {
            let config = load_config(cli.config.as_deref(), &set)?;
            let spec = SweepSpec::from_config(&config, cli.seed)?;
            let rows = spec.run()?;
            let comments = vec![spec.describe(), format!("fixed: {}", table::params_echo(&spec.fixed))];
            table::write_metrics(open_output(out)?, spec.seed, &comments, &rows)
                .map_err(|e| CliError::io(out_label(out), e))?;
        }
        Command::Figure { preset, no_detector_noise } => {
            let preset: Preset = preset.parse()?;
            let data = figures::compute(preset, !no_detector_noise)?;
            let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(preset.name()));
            for f in figures::write(&data, &dir, cli.seed.unwrap_or(0))? {
                eprintln!("wrote {}", dir.join(f).display());
            }
        }
        Command::Timeseries { set } => {
            let config = load_config(cli.config.as_deref(), &set)?;
            let spec = ExperimentSpec::from_config(&config, cli.seed)?;
            let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("timeseries"));
            let (outcome, written) = experiment::timeseries(&spec, &dir)?;
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            for r in &outcome.reports {
                eprintln!(
                    "{}: g2(0) = {} ± {}, BER = {}, MI = {} bit",
                    r.pair,
                    num(r.g2_zero),
                    num(r.g2_zero_stderr),
                    num(r.bits.ber),
                    num(r.bits.mi_plugin)
                );
            }
        }
        Command::G2 { first, second, detector_window, coherence_time, max_lag, lags, block_length } => {
            let args = DumpG2 {
                first,
                second,
                detector_window,
                coherence_time,
                options: G2Options {
                    max_lag,
                    lag_count: lags,
                    block_length,
                    resamples: 200,
                    seed: cli.seed.unwrap_or(0),
                },
            };
            let est = experiment::g2_from_dumps(&args)?;
            let echo = format!(
                "first={} second={} detector_window={} coherence_time={}",
                args.first.display(),
                args.second.display(),
                num(detector_window),
                num(coherence_time)
            );
            experiment::write_g2_csv(open_output(out)?, args.options.seed, &echo, &[("first-second".into(), est)])
                .map_err(|e| CliError::io(out_label(out), e))?;
        }
        Command::EveBounds { tau_c, photon_energy, json } => {
            let b = eve_energy_bounds(tau_c, photon_energy)?;
            let mut w = open_output(out)?;
            let text = if json {
                serde_json::to_string(&b).map_err(|e| CliError::Usage(e.to_string()))?
            } else {
                [
                    ("coherence time", num(b.coherence_time), "s"),
                    ("photon energy", num(b.photon_energy), "eV"),
                    ("time window", num(b.delta_t), "s"),
                    ("min energy spread", num(b.delta_e_min), "eV"),
                    ("wavelength", num(b.wavelength), "m"),
                    ("vacuum energy", num(b.vacuum_energy), "eV"),
                    ("ratio", num(b.ratio), ""),
                ]
                .iter()
                .map(|(k, v, unit)| format!("{k:<18}{v} {unit}").trim_end().to_string())
                .collect::<Vec<_>>()
                .join("\n")
            };
            writeln!(w, "{text}")
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(out_label(out), e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
