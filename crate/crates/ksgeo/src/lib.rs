//! Command-line front end and file formats for `ksgeo-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod ks_check;
pub mod verify;

pub use error::{CliError, CliResult, Exit};
