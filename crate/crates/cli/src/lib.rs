//! Command-line front end for the thermal-light key distribution model.

pub mod config;
pub mod error;
pub mod experiment;
pub mod figures;
pub mod sweep;
pub mod table;

pub use error::{CliError, Result};
