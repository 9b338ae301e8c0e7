#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermal_qkd::gaussian::{beamsplitter_symplectic, CovarianceMatrix, GaussianState, DisplacementVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rotation of one mode's phase space by `theta`.
pub fn phase_shift(theta: f64, mode: usize, modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    let (c, si) = (theta.cos(), theta.sin());
    let k = 2 * mode;
    s[(k, k)] = c;
    s[(k, k + 1)] = -si;
    s[(k + 1, k)] = si;
    s[(k + 1, k + 1)] = c;
    s
}

pub fn squeezer(r: f64, mode: usize, modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    s[(2 * mode, 2 * mode)] = r.exp();
    s[(2 * mode + 1, 2 * mode + 1)] = (-r).exp();
    s
}

/// Product of random passive and squeezing layers; symplectic by construction.
pub fn random_symplectic(rng: &mut ChaCha8Rng, modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    for _ in 0..3 * modes {
        let i = rng.random_range(0..modes);
        let layer = match rng.random_range(0..3) {
            0 => phase_shift(rng.random_range(0.0..std::f64::consts::TAU), i, modes),
            1 => squeezer(rng.random_range(-1.0..1.0), i, modes),
            _ if modes > 1 => {
                let j = (i + 1 + rng.random_range(0..modes - 1)) % modes;
                beamsplitter_symplectic(rng.random_range(0.0..=1.0), i, j, modes).unwrap()
            }
            _ => phase_shift(rng.random_range(0.0..1.0), i, modes),
        };
        s = layer * s;
    }
    s
}

/// `S diag(ν) Sᵀ` with symplectic eigenvalues drawn from `[1, 1 + spread]`.
pub fn random_state(rng: &mut ChaCha8Rng, modes: usize, spread: f64) -> GaussianState {
    let mut nus = Vec::with_capacity(2 * modes);
    for _ in 0..modes {
        let nu = 1.0 + rng.random_range(0.0..spread);
        nus.extend([nu, nu]);
    }
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(nus));
    let s = random_symplectic(rng, modes);
    let cov = &s * d * s.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::new(
        CovarianceMatrix::new(cov).unwrap(),
        DisplacementVector::zeros(modes),
        (0..modes).map(|k| format!("m{k}")).collect(),
    )
    .unwrap()
}
