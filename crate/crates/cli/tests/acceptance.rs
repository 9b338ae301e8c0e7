//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermal_qkd::gaussian::{thermal_occupation, thermal_occupation_from_frequency};
use thermal_qkd::metrics::{eve_energy_bounds, MetricsReport};
use thermal_qkd::network::{build_pipeline, closed_form_blocks_eta4, BlockSet, Party, ProtocolParams};
use thermal_qkd::timeseries::{
    ber_and_mutual_info, detect, estimate_g2, generate_field, run_network, slice_bits, split_field, G2Options,
    NetworkConfig, Regime, SimConfig, VacuumInput,
};
use thermal_qkd_cli::figures::{compute, FigureData, Preset};

use common::{exit_code, run};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn column(data: &FigureData, file: &str, f: impl Fn(&MetricsReport) -> f64) -> Vec<f64> {
    data.series(file).unwrap_or_else(|| panic!("missing {file}")).rows.iter().map(f).collect()
}

fn closed_form_equivalence() -> Outcome {
    const ALL: [Party; 4] = [Party::Alice, Party::Eve, Party::Bob, Party::Noise];
    let (worst, elapsed) = {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let p = ProtocolParams {
                eta1: rng.random_range(0.0..=1.0),
                eta2: rng.random_range(0.0..=1.0),
                eta4: rng.random_range(0.01..0.99),
                epsilon: rng.random_range(0.0..2.0),
                v_s_x: rng.random_range(1.0..5000.0),
                v_s_p: rng.random_range(1.0..5000.0),
                v_e: rng.random_range(1.0..10.0),
                n_a: 1.0,
                n_b: 1.0,
            };
            let numeric = BlockSet::from_state(&build_pipeline(&p).unwrap().after_eta4, &ALL).unwrap();
            let closed = closed_form_blocks_eta4(&p).unwrap();
            worst = worst.max(closed.max_abs_difference(&numeric).unwrap());
        }
        (worst, start.elapsed())
    };
    outcome(
        worst < 1e-10 && elapsed < Duration::from_secs(5),
        format!("max |closed - propagated| = {worst:.3e} (< 1e-10), {:.2} s (< 5 s)", elapsed.as_secs_f64()),
    )
}

fn occupation() -> Outcome {
    let angular = thermal_occupation(3e10, 300.0).unwrap();
    let ordinary = thermal_occupation_from_frequency(3e10, 300.0).unwrap();
    outcome(
        (angular - 1309.0).abs() <= 0.5 && (ordinary - 207.8).abs() <= 0.1,
        format!("n(3e10 rad/s, 300 K) = {angular:.3} (1309 ± 0.5); n(3e10 Hz, 300 K) = {ordinary:.3} (≈ 207.8)"),
    )
}

fn eve_bounds() -> Outcome {
    let b = eve_energy_bounds(1e-6, 1.59).unwrap();
    outcome(
        (b.delta_e_min - 6.6e-10).abs() <= 0.1e-10 && (b.vacuum_energy - 0.13).abs() <= 0.01,
        format!("dE_min = {:.4e} eV ((6.6 ± 0.1)e-10), E0 = {:.4} eV (0.13 ± 0.01)", b.delta_e_min, b.vacuum_energy),
    )
}

fn key_rate_versus_eve_input() -> Outcome {
    let (data, elapsed) = {
        let start = Instant::now();
        let data = compute(Preset::Fig5, true).unwrap();
        (data, start.elapsed())
    };
    let eta2 = column(&data, "fig5_ve1.csv", |r| r.params.eta2);
    let k: Vec<Vec<f64>> = ["fig5_ve1.csv", "fig5_ve2.csv", "fig5_ve5.csv"]
        .iter()
        .map(|f| column(&data, f, |r| r.key_rate_k))
        .collect();
    let positive = k.iter().flatten().all(|&v| v > 0.0);
    let above: Vec<usize> = (0..eta2.len()).filter(|&i| eta2[i] >= 0.35 - 1e-12).collect();
    let failures: Vec<f64> = above.iter().filter(|&&i| k[2][i] <= k[0][i]).map(|&i| eta2[i]).collect();
    let reversal = (0..eta2.len()).any(|i| eta2[i] < 0.35 && k[2][i] < k[0][i]);
    let crossover = (1..eta2.len())
        .find(|&i| k[2][i] > k[0][i] && k[2][i - 1] <= k[0][i - 1])
        .map(|i| {
            let (d0, d1) = (k[2][i - 1] - k[0][i - 1], k[2][i] - k[0][i]);
            eta2[i - 1] + (eta2[i] - eta2[i - 1]) * d0 / (d0 - d1)
        });
    outcome(
        positive && failures.is_empty() && reversal && elapsed < Duration::from_secs(10),
        format!(
            "K > 0 everywhere: {positive}; K(Ve=5) <= K(Ve=1) at eta2 = {failures:?} (none allowed at eta2 >= 0.35); \
             reversal below 0.35: {reversal}; interpolated crossover {}; {:.2} s (< 10 s)",
            crossover.map_or("none".to_string(), |c| format!("{c:.4}")),
            elapsed.as_secs_f64()
        ),
    )
}

fn discord_suite() -> Outcome {
    let data = compute(Preset::Fig6, true).unwrap();
    let d: Vec<Vec<f64>> = ["fig6_ve1.csv", "fig6_ve2.csv", "fig6_ve5.csv"]
        .iter()
        .map(|f| column(&data, f, |r| r.discord_b_given_a))
        .collect();
    let positive = d.iter().flatten().all(|&v| v > 0.0);
    let monotone = d.iter().all(|s| s.windows(2).all(|w| w[1] >= w[0]));
    let ordered = d[1].iter().zip(&d[0]).all(|(two, one)| two <= one);
    outcome(
        positive && monotone && ordered,
        format!("D > 0: {positive}; non-decreasing in eta2: {monotone}; D(Ve=2) <= D(Ve=1): {ordered}"),
    )
}

fn excess_noise_suite() -> Outcome {
    let data = compute(Preset::Fig7, true).unwrap();
    let mut worst_chi_ae = 0.0f64;
    let mut lower = true;
    for ve in ["1", "2"] {
        let (base, noisy) = (format!("fig7_ve{ve}.csv"), format!("fig7_ve{ve}_eps1.csv"));
        for (a, b) in column(&data, &base, |r| r.chi_ae).iter().zip(column(&data, &noisy, |r| r.chi_ae)) {
            worst_chi_ae = worst_chi_ae.max((a - b).abs());
        }
        for f in [|r: &MetricsReport| r.i_ab, |r: &MetricsReport| r.chi_be] {
            lower &= column(&data, &noisy, f).iter().zip(column(&data, &base, f)).all(|(n, b)| *n < b);
        }
    }
    outcome(
        worst_chi_ae <= 1e-12 && lower,
        format!("max |chi_AE(eps=1) - chi_AE(eps=0.01)| = {worst_chi_ae:.2e} (<= 1e-12); I_AB and chi_BE strictly lower: {lower}"),
    )
}

fn detector_noise_suite() -> Outcome {
    let data = compute(Preset::Fig8, true).unwrap();
    let k1 = column(&data, "fig8_n1.csv", |r| r.key_rate_k);
    let k5 = column(&data, "fig8_n5.csv", |r| r.key_rate_k);
    let c1 = column(&data, "fig8_n1.csv", |r| r.chi_be);
    let c5 = column(&data, "fig8_n5.csv", |r| r.chi_be);
    let k_lower = k5.iter().zip(&k1).all(|(a, b)| a < b);
    let chi_lower = c5.iter().zip(&c1).all(|(a, b)| a < b);
    let positive = k5.iter().all(|&v| v > 0.0);
    outcome(
        k_lower && chi_lower && positive,
        format!("K lower at N=5: {k_lower}; chi_BE lower at N=5: {chi_lower}; K(N=5) > 0: {positive}"),
    )
}

fn reconciliation_rate_peak() -> Outcome {
    let data = compute(Preset::Fig4, true).unwrap();
    let eta1 = column(&data, "fig4_eta1_thermal.csv", |r| r.params.eta1);
    let k = column(&data, "fig4_eta1_thermal.csv", |r| r.key_rate_k_prime);
    let best = (0..k.len()).max_by(|&i, &j| k[i].total_cmp(&k[j])).unwrap();
    let last = k.len() - 1;
    outcome(
        (eta1[best] - 0.5).abs() <= 0.05 && (eta1[last] - 0.99).abs() < 1e-12 && k[last] < 0.0,
        format!(
            "argmax K' at eta1 = {:.3} (K' = {:.4}; want 0.5 ± 0.05); K'(0.5) = {:.4}; K'(0.99) = {:.4} (want < 0)",
            eta1[best],
            k[best],
            k[(0..k.len()).min_by(|&i, &j| (eta1[i] - 0.5).abs().total_cmp(&(eta1[j] - 0.5).abs())).unwrap()],
            k[last]
        ),
    )
}

/// Zero-lag cross-correlation of the two outputs of a balanced split.
fn split_g2(sim: &SimConfig) -> f64 {
    let field = generate_field(sim).unwrap();
    let (r, t) = split_field(&field, 0.5, VacuumInput::Off, 0).unwrap();
    drop(field);
    let ya = detect(&r, sim, "alice").unwrap();
    let yb = detect(&t, sim, "bob").unwrap();
    let options = G2Options { max_lag: 0.0, lag_count: 1, seed: sim.rng_seed, ..G2Options::default() };
    estimate_g2(&ya, &yb, &options).unwrap().zero_lag
}

fn desk_scale_g2() -> Outcome {
    let fast = SimConfig {
        sample_rate: 1e8,
        duration: 1e-1,
        coherence_time: 1e-6,
        detector_window: 1e-8,
        shot_noise: true,
        rng_seed: 31,
        ..SimConfig::default()
    };
    let slow = SimConfig {
        sample_rate: 1e7,
        duration: 1.0,
        detector_window: 1e-2,
        ..fast.clone()
    };
    let ((thermal, coherent, integrated), elapsed) = {
        let start = Instant::now();
        let thermal = split_g2(&fast);
        let coherent = split_g2(&SimConfig { regime: Regime::Coherent, ..fast.clone() });
        let integrated = split_g2(&slow) - 1.0;
        ((thermal, coherent, integrated), start.elapsed())
    };
    outcome(
        (1.9..=2.1).contains(&thermal)
            && (0.98..=1.02).contains(&coherent)
            && (3e-5..=3e-4).contains(&integrated)
            && elapsed < Duration::from_secs(60),
        format!(
            "thermal g2(0) = {thermal:.4} [1.9, 2.1]; coherent g2(0) = {coherent:.4} [0.98, 1.02]; \
             T_int/tau_c = 1e4: g2(0) - 1 = {integrated:.3e} [3e-5, 3e-4]; {:.1} s (< 60 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn bit_layer() -> Outcome {
    let sim = SimConfig { shot_noise: true, ..SimConfig::default() };
    let split = |delay: f64| {
        let cfg = NetworkConfig {
            sim: SimConfig { path_delay: delay, ..sim.clone() },
            eta2: 0.5,
            ..NetworkConfig::default()
        };
        let t = run_network(&cfg).unwrap();
        ber_and_mutual_info(&slice_bits(&t.alice).unwrap().bits, &slice_bits(&t.bob).unwrap().bits).unwrap()
    };
    let shared = split(0.0);
    let sigma = (0.25 / shared.bits as f64).sqrt();
    let shared_ok = shared.ber < 0.5 - 5.0 * sigma && shared.mi_plugin > 0.0;

    let stream = |seed| {
        let cfg = SimConfig { rng_seed: seed, ..sim.clone() };
        slice_bits(&detect(&generate_field(&cfg).unwrap(), &cfg, "alice").unwrap()).unwrap().bits
    };
    let independent = ber_and_mutual_info(&stream(101), &stream(202)).unwrap();
    let independent_ok = (independent.ber - 0.5).abs() <= 0.02;

    let delayed = split(50.0 * sim.coherence_time);
    let delayed_ok = delayed.mi_plugin < 0.01;
    outcome(
        shared_ok && independent_ok && delayed_ok,
        format!(
            "split arms: BER = {:.4} (< {:.4}), MI = {:.4} bit (> 0); independent sources: BER = {:.4} (0.5 ± 0.02); \
             delay 50 tau_c: MI = {:.2e} bit (< 0.01)",
            shared.ber,
            0.5 - 5.0 * sigma,
            shared.mi_plugin,
            independent.ber,
            delayed.mi_plugin
        ),
    )
}

fn run_twice(dir: &Path, name: &str, args: &[&str]) -> Result<(), String> {
    let outputs: Vec<_> = ["first", "second"].iter().map(|r| dir.join(name).join(r)).collect();
    for out in &outputs {
        let mut full = args.to_vec();
        full.extend(["--out", out.to_str().unwrap()]);
        let result = run(&full);
        if exit_code(&result) != 0 {
            return Err(format!("{name} exited {}", exit_code(&result)));
        }
    }
    let read = |p: &Path| -> Vec<(String, Vec<u8>)> {
        if p.is_dir() {
            let mut files: Vec<_> = fs::read_dir(p)
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&f).unwrap()))
                .collect();
            files.sort();
            files
        } else {
            vec![(String::new(), fs::read(p).unwrap())]
        }
    };
    let (a, b) = (read(&outputs[0]), read(&outputs[1]));
    if a.is_empty() || a != b {
        return Err(format!("{name} CSVs differ"));
    }
    Ok(())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("sweep")).unwrap();
    let runs: [(&str, Vec<&str>); 3] = [
        (
            "sweep",
            vec!["metrics-sweep", "--seed", "7", "--set", "param=eta2", "--set", "min=0.01", "--set", "max=0.99", "--set", "count=50"],
        ),
        ("figure", vec!["figure", "fig5", "--seed", "7"]),
        ("timeseries", vec!["timeseries", "--seed", "7", "--set", "duration=2e-3", "--set", "shot_noise=on", "--set", "trace_csv=on"]),
    ];
    let errors: Vec<String> = runs.iter().filter_map(|(name, args)| run_twice(dir.path(), name, args).err()).collect();
    outcome(
        errors.is_empty(),
        if errors.is_empty() {
            "metrics-sweep, figure and timeseries CSVs byte-identical across two runs".to_string()
        } else {
            errors.join("; ")
        },
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("closed-form blocks match propagation", closed_form_equivalence),
        ("thermal occupation", occupation),
        ("eavesdropper energy bounds", eve_bounds),
        ("key rate versus eavesdropper input", key_rate_versus_eve_input),
        ("discord", discord_suite),
        ("excess noise", excess_noise_suite),
        ("detector noise", detector_noise_suite),
        ("reconciliation key rate peak", reconciliation_rate_peak),
        ("desk-scale g2", desk_scale_g2),
        ("bit layer", bit_layer),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (o, elapsed) = timed(check);
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
