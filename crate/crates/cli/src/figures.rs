//! Parameter presets that regenerate the key-rate, discord, Holevo and
//! detector-noise figure data.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thermal_qkd::metrics::MetricsReport;
use thermal_qkd::network::{db_to_transmittance, ProtocolParams};

use crate::error::{CliError, Result};
use crate::sweep::evaluate_all;
use crate::table;

/// Grid shared by every η2 sweep.
pub const ETA2_POINTS: usize = 50;
pub const ETA2_MIN: f64 = 0.01;
pub const ETA2_MAX: f64 = 0.99;
/// η1 resolution of the single-row key-rate sweep.
pub const ETA1_POINTS: usize = 99;
/// Per-axis resolution of the (η1, η2) surfaces.
pub const SURFACE_POINTS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7, Preset::Fig8];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                CliError::Usage(format!("unknown preset {s:?}; expected one of fig4, fig5, fig6, fig7, fig8"))
            })
    }
}

/// One CSV of a preset.
#[derive(Clone, Debug)]
pub struct Series {
    pub file: String,
    pub label: String,
    pub swept: Vec<&'static str>,
    pub base: ProtocolParams,
    pub rows: Vec<MetricsReport>,
}

#[derive(Clone, Debug)]
pub struct FigureData {
    pub preset: Preset,
    pub series: Vec<Series>,
    pub assumptions: Vec<String>,
}

impl FigureData {
    pub fn series(&self, file: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.file == file)
    }
}

pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { max } else { min + (max - min) * k as f64 / last })
        .collect()
}

pub fn eta2_grid() -> Vec<f64> {
    linspace(ETA2_MIN, ETA2_MAX, ETA2_POINTS)
}

/// Network at −7 dB channel transmittance, ε = 10⁻², unit detector noise and
/// a source of 2619 SNU.
pub fn baseline(detector_noise: bool) -> ProtocolParams {
    let n = if detector_noise { 1.0 } else { 0.0 };
    ProtocolParams {
        eta1: 0.5,
        eta2: 0.5,
        eta4: db_to_transmittance(-7.0),
        epsilon: 1e-2,
        v_e: 1.0,
        n_a: n,
        n_b: n,
        ..ProtocolParams::default().with_source_variance(2619.0)
    }
}

fn eta2_series(file: &str, label: &str, base: ProtocolParams) -> Result<Series> {
    let points: Vec<ProtocolParams> = eta2_grid()
        .into_iter()
        .map(|eta2| ProtocolParams { eta2, ..base })
        .collect();
    Ok(Series {
        file: file.to_string(),
        label: label.to_string(),
        swept: vec!["eta2"],
        base,
        rows: evaluate_all(&points)?,
    })
}

fn eve_inputs(preset: Preset, base: ProtocolParams, inputs: &[f64]) -> Result<Vec<Series>> {
    inputs
        .iter()
        .map(|&v_e| {
            eta2_series(
                &format!("{preset}_ve{v_e}.csv"),
                &format!("V_e = {v_e} SNU"),
                ProtocolParams { v_e, ..base },
            )
        })
        .collect()
}

pub fn compute(preset: Preset, detector_noise: bool) -> Result<FigureData> {
    let base = baseline(detector_noise);
    let mut assumptions = vec![
        "transmittance in dB read as a power ratio: -7 dB -> eta4 = 10^(-0.7)".to_string(),
        "source variance 2619 SNU (thermal occupation 1309)".to_string(),
        "variances in shot-noise units, vacuum = 1; entropies in bits".to_string(),
        if detector_noise {
            "detector noise n_a = n_b = 1 SNU added to Alice and Bob before every metric".to_string()
        } else {
            "detector noise disabled (n_a = n_b = 0)".to_string()
        },
        "discord minimised over x and p homodynes on Alice; Holevo bounds condition on an x homodyne"
            .to_string(),
    ];
    let series = match preset {
        Preset::Fig4 => {
            assumptions.push(
                "simulated stand-in for the measured key-rate surfaces: K' over (eta1, eta2) at eta4 = -7 dB, epsilon = 0.01"
                    .to_string(),
            );
            assumptions.push("coherent source modelled as V_s = 1 SNU".to_string());
            let cut: Vec<ProtocolParams> = linspace(ETA2_MIN, ETA2_MAX, ETA1_POINTS)
                .into_iter()
                .map(|eta1| ProtocolParams { eta1, eta2: 0.5, ..base })
                .collect();
            let surface = |base: ProtocolParams| -> Vec<ProtocolParams> {
                let axis = linspace(ETA2_MIN, ETA2_MAX, SURFACE_POINTS);
                axis.iter()
                    .flat_map(|&eta1| axis.iter().map(move |&eta2| ProtocolParams { eta1, eta2, ..base }))
                    .collect()
            };
            let coherent = base.with_source_variance(1.0);
            vec![
                Series {
                    file: "fig4_eta1_thermal.csv".into(),
                    label: "thermal source, eta2 = 0.5".into(),
                    swept: vec!["eta1"],
                    base: ProtocolParams { eta2: 0.5, ..base },
                    rows: evaluate_all(&cut)?,
                },
                Series {
                    file: "fig4_surface_thermal.csv".into(),
                    label: "thermal source".into(),
                    swept: vec!["eta1", "eta2"],
                    base,
                    rows: evaluate_all(&surface(base))?,
                },
                Series {
                    file: "fig4_surface_coherent.csv".into(),
                    label: "coherent source".into(),
                    swept: vec!["eta1", "eta2"],
                    base: coherent,
                    rows: evaluate_all(&surface(coherent))?,
                },
            ]
        }
        Preset::Fig5 => {
            assumptions.push(
                "eta4 not stated for the key-rate sweep; filled with -7 dB as in the neighbouring figures"
                    .to_string(),
            );
            eve_inputs(preset, base, &[1.0, 2.0, 5.0])?
        }
        Preset::Fig6 => eve_inputs(preset, base, &[1.0, 2.0, 5.0])?,
        Preset::Fig7 => {
            let mut s = eve_inputs(preset, base, &[1.0, 2.0])?;
            for v_e in [1.0, 2.0] {
                s.push(eta2_series(
                    &format!("fig7_ve{v_e}_eps1.csv"),
                    &format!("V_e = {v_e} SNU, epsilon = 1 SNU"),
                    ProtocolParams { v_e, epsilon: 1.0, ..base },
                )?);
            }
            s
        }
        Preset::Fig8 => {
            let mut s = Vec::new();
            for n in [1.0, 5.0] {
                s.push(eta2_series(
                    &format!("fig8_n{n}.csv"),
                    &format!("N_a = N_b = {n} SNU"),
                    ProtocolParams { n_a: n, n_b: n, ..base },
                )?);
            }
            assumptions.retain(|a| !a.starts_with("detector noise"));
            assumptions.push("detector noise set per series, overriding the default".to_string());
            s
        }
    };
    Ok(FigureData {
        preset,
        series,
        assumptions,
    })
}

#[derive(Serialize)]
struct ManifestSeries<'a> {
    file: &'a str,
    label: &'a str,
    swept: &'a [&'static str],
    rows: usize,
    fixed: &'a ProtocolParams,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    preset: &'static str,
    seed: u64,
    eta2_grid: Option<[f64; 3]>,
    assumptions: &'a [String],
    series: Vec<ManifestSeries<'a>>,
}

/// Writes one CSV per series plus `<preset>_manifest.json` into `dir`.
pub fn write(data: &FigureData, dir: &Path, seed: u64) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for s in &data.series {
        let path = dir.join(&s.file);
        let comments = vec![
            format!("preset={} series={}", data.preset, s.label),
            format!("swept={} fixed: {}", s.swept.join(","), table::params_echo(&s.base)),
        ];
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        table::write_metrics(std::io::BufWriter::new(file), seed, &comments, &s.rows)
            .map_err(|e| CliError::io(&path, e))?;
        written.push(s.file.clone());
    }
    let manifest = Manifest {
        tool: table::TOOL,
        version: table::VERSION,
        preset: data.preset.name(),
        seed,
        eta2_grid: (data.preset != Preset::Fig4).then_some([ETA2_MIN, ETA2_MAX, ETA2_POINTS as f64]),
        assumptions: &data.assumptions,
        series: data
            .series
            .iter()
            .map(|s| ManifestSeries {
                file: &s.file,
                label: &s.label,
                swept: &s.swept,
                rows: s.rows.len(),
                fixed: &s.base,
            })
            .collect(),
    };
    let name = format!("{}_manifest.json", data.preset);
    let path = dir.join(&name);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Usage(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    written.push(name);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig3".parse::<Preset>().is_err());
    }

    #[test]
    fn eta2_grid_hits_round_values() {
        let g = eta2_grid();
        assert_eq!(g.len(), 50);
        assert!((g[17] - 0.35).abs() < 1e-12);
        assert_eq!(*g.last().unwrap(), 0.99);
    }

    #[test]
    fn fig5_records_filled_channel() {
        let data = compute(Preset::Fig5, true).unwrap();
        assert_eq!(data.series.len(), 3);
        assert!(data.assumptions.iter().any(|a| a.contains("eta4 not stated")));
        for s in &data.series {
            assert_eq!(s.rows.len(), ETA2_POINTS);
            assert!((s.base.eta4 - 0.199526231497).abs() < 1e-12);
        }
    }

    #[test]
    fn disabling_detector_noise() {
        let data = compute(Preset::Fig6, false).unwrap();
        assert!(data.series.iter().all(|s| s.base.n_a == 0.0 && s.base.n_b == 0.0));
    }
}
