//! Command-line front end: configuration, command dispatch and SVG plots.

pub mod args;
pub mod config;
pub mod plot;
pub mod run;

pub use config::{Command, RunConfig, Suite};
pub use run::{error_json, run, write_error, Outcome};
