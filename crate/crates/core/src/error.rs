use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A covariance matrix violates the uncertainty principle.
    #[error("unphysical covariance matrix: smallest symplectic eigenvalue {min_eigenvalue}")]
    Unphysical { min_eigenvalue: f64 },

    #[error("covariance matrix is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("covariance matrix is not symmetric (max deviation {deviation})")]
    NotSymmetric { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid mode selection: {0}")]
    InvalidModes(String),

    #[error("missing mode labelled {0:?}")]
    MissingMode(String),

    /// The thermal noise channel has no auxiliary-mode variance at this transmittance.
    #[error("degenerate channel: eta4 = {eta4}, epsilon = {epsilon}")]
    DegenerateChannel { eta4: f64, epsilon: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A detector trace has zero (or non-finite) mean intensity.
    #[error("detector {0:?} recorded no signal")]
    DeadDetector(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("malformed trace file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}
