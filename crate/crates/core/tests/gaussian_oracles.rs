mod common;

use nalgebra::{DMatrix, Matrix2};
use proptest::prelude::*;
use thermal_qkd::gaussian::{
    beamsplitter_symplectic, g_function, thermal_state, von_neumann_entropy, GaussianState,
    Quadrature, SymplecticForm,
};

use common::{random_state, random_symplectic, rng};

/// Two-mode symplectic eigenvalues from the invariants of the block form.
fn two_mode_closed_form(cov: &DMatrix<f64>) -> [f64; 2] {
    let a = Matrix2::new(cov[(0, 0)], cov[(0, 1)], cov[(1, 0)], cov[(1, 1)]);
    let b = Matrix2::new(cov[(2, 2)], cov[(2, 3)], cov[(3, 2)], cov[(3, 3)]);
    let c = Matrix2::new(cov[(0, 2)], cov[(0, 3)], cov[(1, 2)], cov[(1, 3)]);
    let delta = a.determinant() + b.determinant() + 2.0 * c.determinant();
    let det = cov.determinant();
    let root = (delta * delta - 4.0 * det).max(0.0).sqrt();
    [((delta - root) / 2.0).sqrt(), ((delta + root) / 2.0).sqrt()]
}

#[test]
fn two_mode_spectrum_matches_invariant_formula() {
    let mut r = rng(11);
    for _ in 0..1000 {
        let state = random_state(&mut r, 2, 4.0);
        let generic = state.cov().symplectic_eigenvalues().unwrap();
        let closed = two_mode_closed_form(state.cov().entries());
        for (g, c) in generic.iter().zip(closed) {
            let scale = c.max(1.0);
            assert!((g - c).abs() < 1e-10 * scale, "{generic:?} vs {closed:?}");
        }
    }
}

#[test]
fn homodyne_never_increases_entropy() {
    let mut r = rng(12);
    for trial in 0..1000 {
        let modes = 2 + trial % 2;
        let state = random_state(&mut r, modes, 3.0);
        let rest: Vec<usize> = (1..modes).collect();
        let before = state.partial_trace(&rest).unwrap().entropy().unwrap();
        for q in Quadrature::BOTH {
            let after = state.homodyne_condition(0, q).unwrap().entropy().unwrap();
            assert!(after <= before + 1e-9, "trial {trial}: {after} > {before}");
        }
    }
}

#[test]
fn thermal_entropy_identity() {
    // S of a thermal state with n photons is (n+1)log2(n+1) - n log2 n.
    for n in [0.5, 10.0, 1308.7] {
        let closed = (n + 1.0) * (n + 1.0_f64).log2() - n * n.log2();
        let s = thermal_state(n).unwrap().entropy().unwrap();
        assert!((s - closed).abs() < 1e-9 * closed.max(1.0));
    }
}

#[test]
fn restricting_to_two_parties_keeps_their_joint_block() {
    let mut r = rng(13);
    let state = random_state(&mut r, 4, 2.0)
        .with_labels(["alice", "eve", "bob", "noise"])
        .unwrap();
    let ab = state.select(&["alice", "bob"]).unwrap();
    let idx = [0, 1, 4, 5];
    for (i, &gi) in idx.iter().enumerate() {
        for (j, &gj) in idx.iter().enumerate() {
            assert_eq!(ab.cov().entries()[(i, j)], state.cov().entries()[(gi, gj)]);
        }
    }
}

fn assert_symmetric(m: &DMatrix<f64>) {
    let scale = m.amax().max(1.0);
    assert!((m - m.transpose()).amax() <= 1e-12 * scale);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn spectrum_is_symplectic_invariant(seed in any::<u64>(), modes in 1usize..5) {
        let mut r = rng(seed);
        let state = random_state(&mut r, modes, 5.0);
        let s = random_symplectic(&mut r, modes);
        prop_assert!(SymplecticForm::new(modes).is_symplectic(&s, 1e-9));
        let moved = state.apply_symplectic(&s).unwrap();
        assert_symmetric(moved.cov().entries());
        let before = state.cov().symplectic_eigenvalues().unwrap();
        let after = moved.cov().symplectic_eigenvalues().unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-8 * x.max(1.0), "{before:?} vs {after:?}");
        }
    }

    #[test]
    fn beamsplitter_networks_stay_physical(
        etas in proptest::collection::vec(0.0f64..=1.0, 1..8),
        variances in proptest::collection::vec(1.0f64..5000.0, 3),
    ) {
        let mut state = GaussianState::thermal_with_variance(variances[0], "a").unwrap();
        for (k, v) in variances[1..].iter().enumerate() {
            state = state.tensor(&GaussianState::thermal_with_variance(*v, &format!("m{k}")).unwrap());
        }
        for (k, eta) in etas.iter().enumerate() {
            let (i, j) = (k % 3, (k + 1) % 3);
            state = state.apply_symplectic(&beamsplitter_symplectic(*eta, i, j, 3).unwrap()).unwrap();
        }
        assert_symmetric(state.cov().entries());
        prop_assert!(state.cov().min_symplectic_eigenvalue().unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn g_is_increasing(x in 1.0f64..1e6, step in 1e-6f64..10.0) {
        prop_assert!(g_function(x + step).unwrap() > g_function(x).unwrap());
    }

    #[test]
    fn entropy_is_additive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_state(&mut r, 2, 3.0);
        let b = random_state(&mut r, 1, 3.0);
        let joint = von_neumann_entropy(a.tensor(&b).cov()).unwrap();
        let sum = a.entropy().unwrap() + b.entropy().unwrap();
        prop_assert!((joint - sum).abs() < 1e-9 * sum.max(1.0));
    }

    #[test]
    fn conditioning_keeps_symmetry(seed in any::<u64>()) {
        let mut r = rng(seed);
        let state = random_state(&mut r, 3, 3.0);
        let c = state.homodyne_condition(1, Quadrature::P).unwrap();
        assert_symmetric(c.cov().entries());
        prop_assert_eq!(c.mode_count(), 2);
    }
}
