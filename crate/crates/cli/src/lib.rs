//! Command line and HTTP front end over `polyexplain-core`.

pub mod commands;
pub mod models;
pub mod regions;
pub mod service;

pub use commands::{run, Cli, CliError};
