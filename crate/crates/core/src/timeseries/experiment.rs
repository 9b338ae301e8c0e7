use super::{
    apply_path_delay, derive_seed, detect, generate_field, split_field, DetectorTrace, FieldTrace,
    SimConfig, VacuumInput,
};
use crate::error::{check_domain, Result};

/// Beamsplitter cascade of the broadcast protocol driven by one simulated source.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    pub sim: SimConfig,
    /// Fraction of the source sent onward; the reflected part goes to Alice.
    pub eta1: f64,
    /// Fraction passing Eve's tap.
    pub eta2: f64,
    /// Transmittance of the channel to Bob.
    pub eta4: f64,
    pub vacuum: VacuumInput,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            eta1: 0.5,
            eta2: 1.0,
            eta4: 1.0,
            vacuum: VacuumInput::Off,
        }
    }
}

/// Fields arriving at each detector, aligned for the path delay.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkFields {
    pub alice: FieldTrace,
    pub bob: FieldTrace,
    pub eve: FieldTrace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkTraces {
    pub alice: DetectorTrace,
    pub bob: DetectorTrace,
    pub eve: DetectorTrace,
}

/// Generates a source field and routes it through the three beamsplitters.
/// With a path delay, Bob's arm is the longer one and all three fields are
/// trimmed to the common span.
pub fn propagate_network(config: &NetworkConfig) -> Result<NetworkFields> {
    config.sim.validate()?;
    for (name, eta) in [("eta1", config.eta1), ("eta2", config.eta2), ("eta4", config.eta4)] {
        check_domain(name, eta, (0.0..=1.0).contains(&eta), "[0, 1]")?;
    }
    let seed = config.sim.rng_seed;
    let source = generate_field(&config.sim)?;
    let (alice, onward) = split_field(&source, config.eta1, config.vacuum, derive_seed(seed, 1))?;
    drop(source);
    let (eve, bob_path) = split_field(&onward, config.eta2, config.vacuum, derive_seed(seed, 2))?;
    drop(onward);
    let (_, bob) = split_field(&bob_path, config.eta4, config.vacuum, derive_seed(seed, 3))?;
    drop(bob_path);

    let delay = config.sim.delay_samples();
    let (alice, bob) = apply_path_delay(&alice, &bob, delay)?;
    let eve = eve.slice(delay..eve.len());
    Ok(NetworkFields { alice, bob, eve })
}

pub fn detect_network(fields: &NetworkFields, sim: &SimConfig) -> Result<NetworkTraces> {
    Ok(NetworkTraces {
        alice: detect(&fields.alice, sim, "alice")?,
        bob: detect(&fields.bob, sim, "bob")?,
        eve: detect(&fields.eve, sim, "eve")?,
    })
}

/// [`propagate_network`] followed by detection at Alice, Bob and Eve.
pub fn run_network(config: &NetworkConfig) -> Result<NetworkTraces> {
    detect_network(&propagate_network(config)?, &config.sim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::Regime;

    fn short(regime: Regime) -> NetworkConfig {
        NetworkConfig {
            sim: SimConfig { duration: 1e-4, regime, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn quarter_of_the_source_reaches_bob() {
        let cfg = NetworkConfig { eta2: 0.5, ..short(Regime::Coherent) };
        let t = run_network(&cfg).unwrap();
        assert!((t.bob.mean() - 0.25).abs() < 1e-12);
        assert!((t.alice.mean() - 0.5).abs() < 1e-12);
        assert!((t.eve.mean() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_aligned() {
        let cfg = NetworkConfig {
            sim: SimConfig { path_delay: 1e-6, ..short(Regime::Thermal).sim },
            ..short(Regime::Thermal)
        };
        let a = run_network(&cfg).unwrap();
        let b = run_network(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.alice.len(), cfg.sim.sample_count() - 100);
        assert_eq!(a.alice.len(), a.bob.len());
        assert_eq!(a.alice.len(), a.eve.len());
    }

    #[test]
    fn rejects_bad_transmittance() {
        let cfg = NetworkConfig { eta4: 1.5, ..short(Regime::Thermal) };
        assert!(run_network(&cfg).is_err());
    }
}
