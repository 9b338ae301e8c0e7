//! Gaussian states of bosonic modes.
//!
//! Quadratures are ordered `(x1, p1, x2, p2, ...)` and measured in shot-noise
//! units: the vacuum has covariance `I` and a thermal state with mean photon
//! number `n` has covariance `(2n + 1) I`. Entropies are in bits.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix2, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Symplectic eigenvalues within this distance below 1 are treated as exactly 1.
pub const PURITY_TOLERANCE: f64 = 1e-9;
/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Singular values below this fraction of the largest are dropped by the pseudo-inverse.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    pub const BOTH: [Quadrature; 2] = [Quadrature::X, Quadrature::P];

    /// Offset of this quadrature inside a mode's 2x2 block.
    pub fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        }
    }
}

impl std::fmt::Display for Quadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    omega: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(modes: usize) -> Self {
        let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
        for k in 0..modes {
            omega[(2 * k, 2 * k + 1)] = 1.0;
            omega[(2 * k + 1, 2 * k)] = -1.0;
        }
        Self { omega }
    }

    pub fn mode_count(&self) -> usize {
        self.omega.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    /// Largest entry of `|S Ω Sᵀ - Ω|`.
    pub fn defect(&self, s: &DMatrix<f64>) -> f64 {
        (s * &self.omega * s.transpose() - &self.omega).amax()
    }

    pub fn is_symplectic(&self, s: &DMatrix<f64>, tolerance: f64) -> bool {
        s.shape() == self.omega.shape() && self.defect(s) <= tolerance
    }
}

/// Quadrature indices belonging to the given modes, in order.
pub(crate) fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Moore–Penrose pseudo-inverse with a cutoff relative to the largest singular value.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = SVD::new(m.clone(), true, true);
    let largest = svd.singular_values.max();
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => unreachable!("SVD computed with both factors"),
    };
    let mut inv = DMatrix::zeros(m.ncols(), m.nrows());
    if largest <= 0.0 {
        return inv;
    }
    let cutoff = PINV_RELATIVE_CUTOFF * largest;
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > cutoff {
            inv += v_t.row(k).transpose() * u.column(k).transpose() / sigma;
        }
    }
    inv
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a `2N x 2N` symmetric matrix. The stored copy is exactly symmetric.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::Dimension {
                expected: rows,
                found: cols,
            });
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::InvalidModes(format!(
                "covariance dimension {rows} is not a positive even number"
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModes("non-finite covariance entry".into()));
        }
        let deviation = (&entries - entries.transpose()).amax();
        if deviation > SYMMETRY_TOLERANCE * entries.amax().max(1.0) {
            return Err(Error::NotSymmetric { deviation });
        }
        Ok(Self {
            entries: symmetrized(&entries),
        })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            entries: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    /// Diagonal covariance from quadrature variances `(x1, p1, x2, p2, ...)`.
    pub fn diagonal(variances: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(
            variances,
        )))
    }

    pub fn mode_count(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }

    /// The 2x2 block coupling mode `i` (rows) to mode `j` (columns).
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        let view = self.entries.view((2 * i, 2 * j), (2, 2));
        Matrix2::new(view[(0, 0)], view[(0, 1)], view[(1, 0)], view[(1, 1)])
    }

    /// Covariance of the listed modes, in the listed order.
    pub fn submatrix(&self, modes: &[usize]) -> Result<Self> {
        check_mode_selection(modes, self.mode_count())?;
        let idx = quadrature_indices(modes);
        Ok(Self {
            entries: self.entries.select_rows(&idx).select_columns(&idx),
        })
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(self)
    }

    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        Ok(self.symplectic_eigenvalues()?[0])
    }

    pub fn is_physical(&self) -> bool {
        self.min_symplectic_eigenvalue()
            .map(|x| x >= 1.0 - PURITY_TOLERANCE)
            .unwrap_or(false)
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(self)
    }
}

fn check_mode_selection(modes: &[usize], mode_count: usize) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::InvalidModes("empty mode selection".into()));
    }
    if let Some(&bad) = modes.iter().find(|&&m| m >= mode_count) {
        return Err(Error::InvalidModes(format!(
            "mode {bad} out of range for {mode_count} modes"
        )));
    }
    for (k, m) in modes.iter().enumerate() {
        if modes[..k].contains(m) {
            return Err(Error::InvalidModes(format!("mode {m} selected twice")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementVector(DVector<f64>);

impl DisplacementVector {
    pub fn zeros(modes: usize) -> Self {
        Self(DVector::zeros(2 * modes))
    }

    pub fn new(entries: DVector<f64>) -> Result<Self> {
        if !entries.len().is_multiple_of(2) {
            return Err(Error::InvalidModes(format!(
                "displacement length {} is odd",
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModes("non-finite displacement".into()));
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(entries))
    }

    pub fn entries(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Covariance, mean and mode names of a multimode Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    cov: CovarianceMatrix,
    disp: DisplacementVector,
    labels: Vec<String>,
}

impl GaussianState {
    pub fn new(
        cov: CovarianceMatrix,
        disp: DisplacementVector,
        labels: Vec<String>,
    ) -> Result<Self> {
        let modes = cov.mode_count();
        if labels.len() != modes {
            return Err(Error::Dimension {
                expected: modes,
                found: labels.len(),
            });
        }
        if disp.len() != 2 * modes {
            return Err(Error::Dimension {
                expected: 2 * modes,
                found: disp.len(),
            });
        }
        Ok(Self { cov, disp, labels })
    }

    pub fn vacuum(label: &str) -> Self {
        Self {
            cov: CovarianceMatrix::identity(1),
            disp: DisplacementVector::zeros(1),
            labels: vec![label.to_string()],
        }
    }

    /// Single undisplaced mode with quadrature variances `vx`, `vp`.
    pub fn single_mode(vx: f64, vp: f64, label: &str) -> Result<Self> {
        check_domain("vx", vx, vx > 0.0, "> 0")?;
        check_domain("vp", vp, vp > 0.0, "> 0")?;
        check_domain(
            "vx * vp",
            vx * vp,
            vx * vp >= 1.0 - PURITY_TOLERANCE,
            ">= 1 (uncertainty principle)",
        )?;
        Ok(Self {
            cov: CovarianceMatrix::diagonal(&[vx, vp])?,
            disp: DisplacementVector::zeros(1),
            labels: vec![label.to_string()],
        })
    }

    /// Thermal mode given directly by its quadrature variance (SNU).
    pub fn thermal_with_variance(variance: f64, label: &str) -> Result<Self> {
        check_domain(
            "variance",
            variance,
            variance >= 1.0 - PURITY_TOLERANCE,
            ">= 1 SNU",
        )?;
        Self::single_mode(variance, variance, label)
    }

    /// Same covariance, new mean. A displaced thermal state is a noisy coherent state.
    pub fn displaced(self, disp: DisplacementVector) -> Result<Self> {
        Self::new(self.cov, disp, self.labels)
    }

    pub fn with_labels<S: Into<String>>(self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels = labels.into_iter().map(Into::into).collect();
        Self::new(self.cov, self.disp, labels)
    }

    pub fn cov(&self) -> &CovarianceMatrix {
        &self.cov
    }

    pub fn disp(&self) -> &DisplacementVector {
        &self.disp
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mode_count(&self) -> usize {
        self.labels.len()
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::MissingMode(label.to_string()))
    }

    /// Direct sum `self ⊕ other`.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (n, m) = (self.cov.entries.nrows(), other.cov.entries.nrows());
        let mut cov = DMatrix::zeros(n + m, n + m);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.cov.entries);
        cov.view_mut((n, n), (m, m)).copy_from(&other.cov.entries);
        let disp = DVector::from_iterator(
            n + m,
            self.disp.0.iter().chain(other.disp.0.iter()).copied(),
        );
        let labels = self.labels.iter().chain(&other.labels).cloned().collect();
        GaussianState {
            cov: CovarianceMatrix { entries: cov },
            disp: DisplacementVector(disp),
            labels,
        }
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<GaussianState> {
        let cov = self.cov.submatrix(keep)?;
        let idx = quadrature_indices(keep);
        let disp = DisplacementVector(self.disp.0.select_rows(&idx));
        let labels = keep.iter().map(|&m| self.labels[m].clone()).collect();
        Ok(GaussianState { cov, disp, labels })
    }

    /// Reduced state on the named modes.
    pub fn select(&self, labels: &[&str]) -> Result<GaussianState> {
        let keep = labels
            .iter()
            .map(|l| self.mode_index(l))
            .collect::<Result<Vec<_>>>()?;
        self.partial_trace(&keep)
    }

    /// Permutes modes; `order` must list every mode exactly once.
    pub fn reorder(&self, order: &[usize]) -> Result<GaussianState> {
        if order.len() != self.mode_count() {
            return Err(Error::InvalidModes(format!(
                "reorder lists {} of {} modes",
                order.len(),
                self.mode_count()
            )));
        }
        self.partial_trace(order)
    }

    /// `γ -> S γ Sᵀ`, `d -> S d`.
    pub fn apply_symplectic(&self, s: &DMatrix<f64>) -> Result<GaussianState> {
        let dim = self.cov.entries.nrows();
        if s.nrows() != dim || s.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: s.nrows().max(s.ncols()),
            });
        }
        let cov = symmetrized(&(s * &self.cov.entries * s.transpose()));
        let disp = s * &self.disp.0;
        Ok(GaussianState {
            cov: CovarianceMatrix { entries: cov },
            disp: DisplacementVector(disp),
            labels: self.labels.clone(),
        })
    }

    /// Outcome-averaged state of the other modes after homodyning `mode`.
    ///
    /// `Γ' = Γ_rest - C (X Γ_m X)^+ Cᵀ` with `X` projecting on the measured
    /// quadrature. The mean of the remaining modes is left unconditioned.
    pub fn homodyne_condition(&self, mode: usize, quadrature: Quadrature) -> Result<GaussianState> {
        let modes = self.mode_count();
        if modes < 2 {
            return Err(Error::InvalidModes(
                "homodyne conditioning needs at least two modes".into(),
            ));
        }
        check_mode_selection(&[mode], modes)?;
        let rest: Vec<usize> = (0..modes).filter(|&m| m != mode).collect();
        let rest_idx = quadrature_indices(&rest);
        let meas_idx = quadrature_indices(&[mode]);

        let cov = &self.cov.entries;
        let gamma_rest = cov.select_rows(&rest_idx).select_columns(&rest_idx);
        let cross = cov.select_rows(&rest_idx).select_columns(&meas_idx);
        let mut projected = DMatrix::zeros(2, 2);
        let q = quadrature.offset();
        projected[(q, q)] = cov[(2 * mode + q, 2 * mode + q)];

        let conditioned = gamma_rest - &cross * pseudo_inverse(&projected) * cross.transpose();
        let disp = DisplacementVector(self.disp.0.select_rows(&rest_idx));
        let labels = rest.iter().map(|&m| self.labels[m].clone()).collect();
        Ok(GaussianState {
            cov: CovarianceMatrix {
                entries: symmetrized(&conditioned),
            },
            disp,
            labels,
        })
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(&self.cov)
    }
}

/// Bose–Einstein occupation `1 / (exp(ħω / k_B T) - 1)` for angular frequency `ω` in rad/s.
pub fn thermal_occupation(omega_angular: f64, temperature: f64) -> Result<f64> {
    check_domain("omega_angular", omega_angular, omega_angular > 0.0, "> 0 rad/s")?;
    check_domain("temperature", temperature, temperature > 0.0, "> 0 K")?;
    let x = HBAR * omega_angular / (BOLTZMANN * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Bose–Einstein occupation for an ordinary frequency in Hz (`ω = 2πν`).
pub fn thermal_occupation_from_frequency(frequency_hz: f64, temperature: f64) -> Result<f64> {
    check_domain("frequency", frequency_hz, frequency_hz > 0.0, "> 0 Hz")?;
    thermal_occupation(std::f64::consts::TAU * frequency_hz, temperature)
}

pub fn variance_from_occupation(n_bar: f64) -> f64 {
    2.0 * n_bar + 1.0
}

pub fn occupation_from_variance(variance: f64) -> f64 {
    (variance - 1.0) / 2.0
}

/// Undisplaced single-mode thermal state with mean photon number `n_bar`.
pub fn thermal_state(n_bar: f64) -> Result<GaussianState> {
    check_domain("n_bar", n_bar, n_bar >= 0.0, ">= 0")?;
    GaussianState::thermal_with_variance(variance_from_occupation(n_bar), "source")
}

/// Two-mode squeezed vacuum with marginal variance `nu`.
pub fn epr_state(nu: f64) -> Result<GaussianState> {
    if !(nu >= 1.0 && nu.is_finite()) {
        return Err(Error::Unphysical { min_eigenvalue: nu });
    }
    let c = (nu * nu - 1.0).sqrt();
    let cov = DMatrix::from_row_slice(
        4,
        4,
        &[
            nu, 0.0, c, 0.0, //
            0.0, nu, 0.0, -c, //
            c, 0.0, nu, 0.0, //
            0.0, -c, 0.0, nu,
        ],
    );
    GaussianState::new(
        CovarianceMatrix::new(cov)?,
        DisplacementVector::zeros(2),
        vec!["eve_in".into(), "eve_kept".into()],
    )
}

pub fn tensor(a: &GaussianState, b: &GaussianState) -> GaussianState {
    a.tensor(b)
}

pub fn partial_trace(state: &GaussianState, keep: &[usize]) -> Result<GaussianState> {
    state.partial_trace(keep)
}

/// Beamsplitter of transmittance `eta` acting on modes `i` and `j`:
/// `[[√η I, μ I], [-μ I, √η I]]` with `μ = √(1-η)`, identity elsewhere.
pub fn beamsplitter_symplectic(
    eta: f64,
    mode_i: usize,
    mode_j: usize,
    total_modes: usize,
) -> Result<DMatrix<f64>> {
    check_domain("eta", eta, (0.0..=1.0).contains(&eta), "[0, 1]")?;
    if mode_i == mode_j {
        return Err(Error::InvalidModes(format!(
            "beamsplitter needs two distinct modes, got {mode_i} twice"
        )));
    }
    check_mode_selection(&[mode_i, mode_j], total_modes)?;
    let t = eta.sqrt();
    let mu = (1.0 - eta).sqrt();
    let mut s = DMatrix::identity(2 * total_modes, 2 * total_modes);
    for q in 0..2 {
        let (a, b) = (2 * mode_i + q, 2 * mode_j + q);
        s[(a, a)] = t;
        s[(a, b)] = mu;
        s[(b, a)] = -mu;
        s[(b, b)] = t;
    }
    Ok(s)
}

pub fn apply_symplectic(state: &GaussianState, s: &DMatrix<f64>) -> Result<GaussianState> {
    state.apply_symplectic(s)
}

/// Symplectic spectrum, ascending.
///
/// With the Cholesky factor `γ = L Lᵀ`, the antisymmetric `M = Lᵀ Ω L` is
/// similar to `Ωγ` up to a factor `i`, so its singular values are the `x_k`,
/// each twice. Working on `M` rather than `MᵀM` keeps the absolute error at
/// machine precision times `|γ|` instead of its square root.
pub fn symplectic_eigenvalues(cov: &CovarianceMatrix) -> Result<Vec<f64>> {
    let Some(chol) = Cholesky::new(cov.entries.clone()) else {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: SymmetricEigen::new(cov.entries.clone()).eigenvalues.min(),
        });
    };
    let l = chol.l();
    let omega = SymplecticForm::new(cov.mode_count());
    let m = l.transpose() * omega.matrix() * &l;

    let mut values: Vec<f64> = m.singular_values().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values
        .chunks_exact(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect())
}

/// Entropy contribution of one symplectic eigenvalue, in bits.
pub fn g_function(x: f64) -> Result<f64> {
    check_domain("x", x, x >= 1.0 - PURITY_TOLERANCE, ">= 1")?;
    if x <= 1.0 {
        return Ok(0.0);
    }
    let plus = 0.5 * (x + 1.0);
    let minus = 0.5 * (x - 1.0);
    Ok(plus * plus.log2() - minus * minus.log2())
}

/// `S(γ) = Σ g(x_k)` over the symplectic spectrum, in bits.
pub fn von_neumann_entropy(cov: &CovarianceMatrix) -> Result<f64> {
    let eigenvalues = symplectic_eigenvalues(cov)?;
    if eigenvalues[0] < 1.0 - PURITY_TOLERANCE {
        return Err(Error::Unphysical {
            min_eigenvalue: eigenvalues[0],
        });
    }
    eigenvalues.into_iter().map(g_function).sum()
}

pub fn homodyne_condition(
    state: &GaussianState,
    measured_mode: usize,
    quadrature: Quadrature,
) -> Result<GaussianState> {
    state.homodyne_condition(measured_mode, quadrature)
}
