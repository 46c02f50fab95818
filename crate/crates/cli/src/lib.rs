//! Configuration parsing and command implementations behind the `qbattery` binary.

pub mod commands;
pub mod config;

pub use commands::{audit_command, render_report, run_command, CommandError, Mode};
pub use config::{parse_config, Config, ConfigError};
