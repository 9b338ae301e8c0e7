//! The central-broadcast beamsplitter network.
//!
//! A thermal source is split at `η1` (reflected port to Alice, transmitted
//! port onward). The onward mode meets Eve's input at `η2`: the transmitted
//! port continues towards Bob, the reflected port goes to Eve. A thermal
//! noise channel is modelled as a third beamsplitter `η4` whose auxiliary
//! input has variance `N`. The same network is available both as numeric
//! symplectic propagation and as closed-form 2x2 blocks.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Result};
use crate::gaussian::{
    beamsplitter_symplectic, CovarianceMatrix, DisplacementVector, GaussianState,
};

pub const ALICE: &str = "alice";
pub const EVE: &str = "eve";
pub const BOB: &str = "bob";
pub const NOISE: &str = "noise";
pub const ONWARD: &str = "onward";

/// Power ratio for an attenuation given in dB, e.g. `-7 dB -> 0.1995`.
pub fn db_to_transmittance(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Variance `N` of the noise-channel input for transmittance `eta4` and excess noise `epsilon`.
///
/// `χ = (1 - η4)/η4 + ε`, `N = η4 χ / (1 - η4)`; equivalently `N = 1 + η4 ε / (1 - η4)`.
pub fn channel_noise_variance(eta4: f64, epsilon: f64) -> Result<f64> {
    check_domain("epsilon", epsilon, epsilon >= 0.0, ">= 0")?;
    if !(eta4 > 0.0 && eta4 < 1.0) {
        return Err(Error::DegenerateChannel { eta4, epsilon });
    }
    let chi = (1.0 - eta4) / eta4 + epsilon;
    Ok(eta4 * chi / (1.0 - eta4))
}

/// Every dial of one network configuration. Variances in SNU.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub eta1: f64,
    pub eta2: f64,
    pub eta4: f64,
    pub epsilon: f64,
    pub v_s_x: f64,
    pub v_s_p: f64,
    /// Variance of Eve's injected mode (the EPR parameter ν).
    pub v_e: f64,
    pub n_a: f64,
    pub n_b: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            eta1: 0.5,
            eta2: 0.5,
            eta4: db_to_transmittance(-7.0),
            epsilon: 1e-2,
            v_s_x: 2619.0,
            v_s_p: 2619.0,
            v_e: 1.0,
            n_a: 1.0,
            n_b: 1.0,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        for (name, eta) in [("eta1", self.eta1), ("eta2", self.eta2), ("eta4", self.eta4)] {
            check_domain(name, eta, (0.0..=1.0).contains(&eta), "[0, 1]")?;
        }
        check_domain("epsilon", self.epsilon, self.epsilon >= 0.0, ">= 0")?;
        check_domain("v_s_x", self.v_s_x, self.v_s_x >= 1.0, ">= 1 SNU")?;
        check_domain("v_s_p", self.v_s_p, self.v_s_p >= 1.0, ">= 1 SNU")?;
        check_domain("v_e", self.v_e, self.v_e >= 1.0, ">= 1 SNU")?;
        check_domain("n_a", self.n_a, self.n_a >= 0.0, ">= 0")?;
        check_domain("n_b", self.n_b, self.n_b >= 0.0, ">= 0")?;
        Ok(())
    }

    /// Noise-channel input variance, extended to the well-defined limits
    /// `η4 -> 0` and (for `ε = 0`) `η4 -> 1`, where it is the vacuum.
    pub fn noise_variance(&self) -> Result<f64> {
        if self.eta4 == 0.0 || (self.eta4 == 1.0 && self.epsilon == 0.0) {
            return Ok(1.0);
        }
        channel_noise_variance(self.eta4, self.epsilon)
    }

    /// Same parameters with a symmetric source of variance `v_s`.
    pub fn with_source_variance(mut self, v_s: f64) -> Self {
        self.v_s_x = v_s;
        self.v_s_p = v_s;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Eve,
    Bob,
    Noise,
}

impl Party {
    pub fn label(self) -> &'static str {
        match self {
            Party::Alice => ALICE,
            Party::Eve => EVE,
            Party::Bob => BOB,
            Party::Noise => NOISE,
        }
    }

    fn short(self) -> char {
        match self {
            Party::Alice => 'a',
            Party::Eve => 'e',
            Party::Bob => 'b',
            Party::Noise => 'n',
        }
    }

    fn from_short(c: char) -> Option<Party> {
        match c {
            'a' => Some(Party::Alice),
            'e' => Some(Party::Eve),
            'b' => Some(Party::Bob),
            // The appendix also calls the noise mode "v".
            'n' | 'v' => Some(Party::Noise),
            _ => None,
        }
    }
}

/// Named 2x2 blocks of a network covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSet {
    parties: Vec<Party>,
    blocks: BTreeMap<(Party, Party), Matrix2<f64>>,
}

impl BlockSet {
    fn new(parties: Vec<Party>) -> Self {
        Self {
            parties,
            blocks: BTreeMap::new(),
        }
    }

    fn insert(&mut self, p: Party, q: Party, block: Matrix2<f64>) {
        self.blocks.insert((p.min(q), p.max(q)), block);
    }

    /// Reads every block of a state whose labels are party names.
    pub fn from_state(state: &GaussianState, parties: &[Party]) -> Result<Self> {
        let idx = parties
            .iter()
            .map(|p| state.mode_index(p.label()))
            .collect::<Result<Vec<_>>>()?;
        let mut set = Self::new(parties.to_vec());
        for (k, &p) in parties.iter().enumerate() {
            for (l, &q) in parties.iter().enumerate().skip(k) {
                set.insert(p, q, state.cov().block(idx[k], idx[l]));
            }
        }
        Ok(set)
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    /// Block with rows on `p` and columns on `q`.
    pub fn get(&self, p: Party, q: Party) -> Option<Matrix2<f64>> {
        let block = self.blocks.get(&(p.min(q), p.max(q)))?;
        Some(if p <= q { *block } else { block.transpose() })
    }

    /// Block by its subscript: `"a"`, `"eb"`, `"bn"`, ... The appendix name
    /// `"ev"` is accepted for the Eve/noise block `"en"`.
    pub fn by_name(&self, name: &str) -> Option<Matrix2<f64>> {
        let mut chars = name.chars();
        let p = Party::from_short(chars.next()?)?;
        let q = match chars.next() {
            Some(c) => Party::from_short(c)?,
            None => p,
        };
        if chars.next().is_some() {
            return None;
        }
        self.get(p, q)
    }

    /// Full covariance matrix in party order.
    pub fn assemble(&self) -> Result<CovarianceMatrix> {
        let n = self.parties.len();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (k, &p) in self.parties.iter().enumerate() {
            for (l, &q) in self.parties.iter().enumerate() {
                let block = self
                    .get(p, q)
                    .ok_or_else(|| Error::MissingMode(format!("{}{}", p.short(), q.short())))?;
                m.view_mut((2 * k, 2 * l), (2, 2)).copy_from(&block);
            }
        }
        CovarianceMatrix::new(m)
    }

    pub fn max_abs_difference(&self, other: &BlockSet) -> Result<f64> {
        Ok((self.assemble()?.entries() - other.assemble()?.entries()).amax())
    }
}

fn diag(x: f64, p: f64) -> Matrix2<f64> {
    Matrix2::new(x, 0.0, 0.0, p)
}

fn per_quadrature(params: &ProtocolParams, f: impl Fn(f64) -> f64) -> Matrix2<f64> {
    diag(f(params.v_s_x), f(params.v_s_p))
}

/// Closed-form blocks after `η2`, in the order (Alice, Eve, Bob-bound).
pub fn closed_form_blocks_eta2(params: &ProtocolParams) -> BlockSet {
    let (eta1, eta2, v_e) = (params.eta1, params.eta2, params.v_e);
    let mu1 = (1.0 - eta1).sqrt();
    let mu2 = (1.0 - eta2).sqrt();
    let onward = |v_s: f64| eta1 * v_s + mu1 * mu1;

    let mut set = BlockSet::new(vec![Party::Alice, Party::Eve, Party::Bob]);
    set.insert(
        Party::Alice,
        Party::Alice,
        per_quadrature(params, |v| mu1 * mu1 * v + eta1),
    );
    set.insert(
        Party::Bob,
        Party::Bob,
        per_quadrature(params, |v| eta2 * onward(v) + mu2 * mu2 * v_e),
    );
    set.insert(
        Party::Eve,
        Party::Eve,
        per_quadrature(params, |v| mu2 * mu2 * onward(v) + eta2 * v_e),
    );
    set.insert(
        Party::Eve,
        Party::Alice,
        per_quadrature(params, |v| mu1 * eta1.sqrt() * mu2 * (v - 1.0)),
    );
    set.insert(
        Party::Eve,
        Party::Bob,
        per_quadrature(params, |v| -mu2 * eta2.sqrt() * (onward(v) - v_e)),
    );
    set.insert(
        Party::Alice,
        Party::Bob,
        per_quadrature(params, |v| -mu1 * eta1.sqrt() * eta2.sqrt() * (v - 1.0)),
    );
    set
}

/// Closed-form blocks after the noise channel, in the order (Alice, Eve, Bob, noise).
pub fn closed_form_blocks_eta4(params: &ProtocolParams) -> Result<BlockSet> {
    let noise = params.noise_variance()?;
    let eta4 = params.eta4;
    let mu4 = (1.0 - eta4).sqrt();
    let stage2 = closed_form_blocks_eta2(params);
    let block = |p, q| stage2.get(p, q).expect("stage-2 block present");
    let gamma_b = block(Party::Bob, Party::Bob);
    let gamma_eb = block(Party::Eve, Party::Bob);
    let gamma_ab = block(Party::Alice, Party::Bob);
    let n_id = Matrix2::identity() * noise;

    let mut set = BlockSet::new(vec![Party::Alice, Party::Eve, Party::Bob, Party::Noise]);
    // Alice and Eve never touch the channel.
    set.insert(Party::Alice, Party::Alice, block(Party::Alice, Party::Alice));
    set.insert(Party::Eve, Party::Eve, block(Party::Eve, Party::Eve));
    set.insert(Party::Eve, Party::Alice, block(Party::Eve, Party::Alice));
    set.insert(Party::Bob, Party::Bob, gamma_b * eta4 + n_id * (mu4 * mu4));
    set.insert(Party::Noise, Party::Noise, gamma_b * (mu4 * mu4) + n_id * eta4);
    set.insert(Party::Bob, Party::Noise, (n_id - gamma_b) * (mu4 * eta4.sqrt()));
    set.insert(Party::Eve, Party::Bob, gamma_eb * eta4.sqrt());
    set.insert(Party::Eve, Party::Noise, gamma_eb * -mu4);
    set.insert(Party::Alice, Party::Bob, gamma_ab * eta4.sqrt());
    set.insert(Party::Alice, Party::Noise, gamma_ab * -mu4);
    Ok(set)
}

/// States after each stage of the network, before detector noise.
#[derive(Clone, Debug, PartialEq)]
pub struct StageOutputs {
    /// (Alice, onward)
    pub after_eta1: GaussianState,
    /// (Alice, Eve, Bob-bound)
    pub after_eta2: GaussianState,
    /// (Alice, Eve, Bob, noise)
    pub after_eta4: GaussianState,
}

fn labelled(state: GaussianState, labels: &[&str]) -> Result<GaussianState> {
    state.with_labels(labels.iter().copied())
}

/// Propagates the source through the three beamsplitters numerically.
pub fn build_pipeline(params: &ProtocolParams) -> Result<StageOutputs> {
    params.validate()?;
    let noise = params.noise_variance()?;

    let source = GaussianState::single_mode(params.v_s_x, params.v_s_p, ONWARD)?;
    let stage1 = source.tensor(&GaussianState::vacuum(ALICE));
    let stage1 = stage1.apply_symplectic(&beamsplitter_symplectic(params.eta1, 0, 1, 2)?)?;
    let after_eta1 = stage1.reorder(&[1, 0])?;

    let eve = GaussianState::thermal_with_variance(params.v_e, EVE)?;
    let stage2 = after_eta1.tensor(&eve);
    let stage2 = stage2.apply_symplectic(&beamsplitter_symplectic(params.eta2, 1, 2, 3)?)?;
    let after_eta2 = labelled(stage2.reorder(&[0, 2, 1])?, &[ALICE, EVE, BOB])?;

    let channel = GaussianState::thermal_with_variance(noise, NOISE)?;
    let stage3 = after_eta2.tensor(&channel);
    let after_eta4 = stage3.apply_symplectic(&beamsplitter_symplectic(params.eta4, 2, 3, 4)?)?;

    Ok(StageOutputs {
        after_eta1,
        after_eta2,
        after_eta4,
    })
}

/// Adds independent detector noise `n_a`, `n_b` (SNU) to Alice's and Bob's
/// modes. Cross blocks and Eve are untouched.
pub fn add_detector_noise(state: &GaussianState, n_a: f64, n_b: f64) -> Result<GaussianState> {
    check_domain("n_a", n_a, n_a >= 0.0, ">= 0")?;
    check_domain("n_b", n_b, n_b >= 0.0, ">= 0")?;
    let alice = state.mode_index(ALICE)?;
    let bob = state.mode_index(BOB)?;
    let mut m = state.cov().entries().clone();
    for (mode, noise) in [(alice, n_a), (bob, n_b)] {
        m[(2 * mode, 2 * mode)] += noise;
        m[(2 * mode + 1, 2 * mode + 1)] += noise;
    }
    GaussianState::new(
        CovarianceMatrix::new(m)?,
        DisplacementVector::new(state.disp().entries().clone())?,
        state.labels().to_vec(),
    )
}
