//! Information-theoretic figures of merit for a network output state.
//!
//! All quantities are von Neumann (quantum) informations in bits per channel
//! use. Conditioning is by homodyne detection, with the pseudo-inverse
//! formula from [`GaussianState::homodyne_condition`].

use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Result};
use crate::gaussian::{GaussianState, Quadrature};
use crate::network::{add_detector_noise, build_pipeline, ProtocolParams, ALICE, BOB, EVE};

/// Electron-volt in joules.
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
/// Reduced Planck constant in eV s.
pub const HBAR_EV: f64 = 6.582_119_569e-16;

fn entropy_of(state: &GaussianState, labels: &[&str]) -> Result<f64> {
    state.select(labels)?.entropy()
}

/// Quantum mutual information `S(p) + S(q) - S(pq)` between two labelled modes.
pub fn mutual_information(state: &GaussianState, p: &str, q: &str) -> Result<f64> {
    Ok(entropy_of(state, &[p])? + entropy_of(state, &[q])? - entropy_of(state, &[p, q])?)
}

/// `I(A:B) = S(Γa) + S(Γb) - S(Γab)`.
pub fn mutual_information_ab(state: &GaussianState) -> Result<f64> {
    mutual_information(state, ALICE, BOB)
}

/// Entropy of `target` after homodyning `measured` in the given quadrature.
fn conditional_entropy(
    state: &GaussianState,
    target: &str,
    measured: &str,
    quadrature: Quadrature,
) -> Result<f64> {
    state
        .select(&[measured, target])?
        .homodyne_condition(0, quadrature)?
        .entropy()
}

/// Holevo bound `χ(P:E) = S(Γe) - S(Γ_{e|x_P})` between Eve and `party`,
/// conditioning on an x-homodyne of the party's mode.
pub fn holevo(state: &GaussianState, party: &str) -> Result<f64> {
    Ok(entropy_of(state, &[EVE])? - conditional_entropy(state, EVE, party, Quadrature::X)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discord {
    pub value: f64,
    /// Homodyne quadrature on Alice's mode attaining the minimum.
    pub quadrature: Quadrature,
}

/// `D(B|A) = S(Γa) - S(Γab) + min_q S(Γ_{b|q_A})`, minimised over x and p homodynes.
pub fn discord_b_given_a(state: &GaussianState) -> Result<Discord> {
    let base = entropy_of(state, &[ALICE])? - entropy_of(state, &[ALICE, BOB])?;
    let mut best: Option<(f64, Quadrature)> = None;
    for q in Quadrature::BOTH {
        let s = conditional_entropy(state, BOB, ALICE, q)?;
        // Ties keep x.
        if best.is_none_or(|(b, _)| s < b) {
            best = Some((s, q));
        }
    }
    let (min_conditional, quadrature) = best.expect("two quadratures tried");
    Ok(Discord {
        value: base + min_conditional,
        quadrature,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyRates {
    /// `K = I(A:B) - χ(B:E)`
    pub k: f64,
    /// `K' = I(A:B) - I(B:E)`
    pub k_prime: f64,
}

pub fn key_rates(state: &GaussianState) -> Result<KeyRates> {
    let i_ab = mutual_information_ab(state)?;
    Ok(KeyRates {
        k: i_ab - holevo(state, BOB)?,
        k_prime: i_ab - mutual_information(state, BOB, EVE)?,
    })
}

/// Every metric for one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub params: ProtocolParams,
    pub i_ab: f64,
    pub i_be: f64,
    pub chi_be: f64,
    pub chi_ae: f64,
    pub discord_b_given_a: f64,
    pub discord_quadrature: Quadrature,
    pub key_rate_k: f64,
    pub key_rate_k_prime: f64,
}

impl MetricsReport {
    /// Metrics of an already-built state; `params` is echoed only.
    pub fn from_state(state: &GaussianState, params: ProtocolParams) -> Result<Self> {
        let i_ab = mutual_information_ab(state)?;
        let i_be = mutual_information(state, BOB, EVE)?;
        let chi_be = holevo(state, BOB)?;
        let chi_ae = holevo(state, ALICE)?;
        let discord = discord_b_given_a(state)?;
        Ok(Self {
            params,
            i_ab,
            i_be,
            chi_be,
            chi_ae,
            discord_b_given_a: discord.value,
            discord_quadrature: discord.quadrature,
            key_rate_k: i_ab - chi_be,
            key_rate_k_prime: i_ab - i_be,
        })
    }

    /// Builds the network, adds `n_a`/`n_b` detector noise, evaluates every metric.
    pub fn evaluate(params: &ProtocolParams) -> Result<Self> {
        let pure = build_pipeline(params)?.after_eta4;
        let noisy = add_detector_noise(&pure, params.n_a, params.n_b)?;
        Self::from_state(&noisy, *params)
    }
}

/// Energy-time bounds on an intercept-and-resend attacker.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EveBounds {
    /// s
    pub coherence_time: f64,
    /// eV
    pub photon_energy: f64,
    /// `Δt = τc / 2`, s
    pub delta_t: f64,
    /// `ΔE >= ħ / (2 Δt)`, eV
    pub delta_e_min: f64,
    /// m
    pub wavelength: f64,
    /// `E0 = ħ c / (2 λ)`, eV
    pub vacuum_energy: f64,
    /// `E0 / ΔE_min`
    pub ratio: f64,
}

pub fn eve_energy_bounds(coherence_time: f64, photon_energy: f64) -> Result<EveBounds> {
    const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    check_domain("coherence_time", coherence_time, coherence_time > 0.0, "> 0 s")?;
    check_domain("photon_energy", photon_energy, photon_energy > 0.0, "> 0 eV")?;
    let delta_t = coherence_time / 2.0;
    let delta_e_min = HBAR_EV / (2.0 * delta_t);
    let wavelength = std::f64::consts::TAU * HBAR_EV * SPEED_OF_LIGHT / photon_energy;
    let vacuum_energy = 0.5 * HBAR_EV * SPEED_OF_LIGHT / wavelength;
    Ok(EveBounds {
        coherence_time,
        photon_energy,
        delta_t,
        delta_e_min,
        wavelength,
        vacuum_energy,
        ratio: vacuum_energy / delta_e_min,
    })
}
