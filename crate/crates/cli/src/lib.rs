//! Command-line runner for fracdim: configuration, dispatch and output.

pub mod config;
pub mod error;
pub mod run;

pub use config::{Command, Descriptor, LadderSpec, RunConfig};
pub use error::CliError;
pub use run::{execute, run, Outcome};
