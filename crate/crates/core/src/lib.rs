//! Central-broadcast key distribution with thermal light.
//!
//! [`gaussian`] holds the covariance-matrix toolkit, [`network`] the
//! beamsplitter cascade shared by Alice, Bob and an eavesdropper, [`metrics`]
//! the information-theoretic figures of merit, and [`timeseries`] a
//! Monte-Carlo model of the intensity-correlation experiment.

pub mod error;
pub mod gaussian;
pub mod metrics;
pub mod network;
pub mod numfmt;
pub mod timeseries;

pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, DisplacementVector, GaussianState, Quadrature};
pub use metrics::{MetricsReport, EveBounds};
pub use network::ProtocolParams;
