//! Configuration loading and subcommand implementations behind the
//! `stirap-tomo` binary.

pub mod commands;
pub mod config;

pub use commands::{CommandError, SweepParam, SweepRow};
pub use config::{ConfigError, Protocol, RunConfig};
