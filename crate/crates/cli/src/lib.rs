//! Configuration, subcommands and run manifests for the `nlhelm` binary.

pub mod config;
pub mod error;
pub mod manifest;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
