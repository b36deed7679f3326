//! Batch front-end: run configuration, table cache, experiment commands and
//! report manifests.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use cache::{cache_dir, TableStore, CACHE_ENV};
pub use commands::{cmd_compare, cmd_psi0_probe, cmd_table, ProbePoint, Regime};
pub use config::RunConfig;
pub use error::CliError;
pub use manifest::{CheckOutcome, CliManifest};
