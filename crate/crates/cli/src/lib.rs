//! Campaign runner behind the `fclt` binary.
//!
//! A run is described by a [`CampaignConfig`], resolved from an optional
//! config file overlaid with command-line flags. Every report embeds the
//! resolved config, and feeding a report back in as a config file replays
//! the run.

mod config;
mod plotdata;
mod run;

pub use config::{Campaign, CampaignConfig, RawConfig};
pub use plotdata::emit_plotdata;
pub use run::{run, RunOutcome};

use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fclt_core::Error),
}

impl CliError {
    /// 2 for anything wrong with the inputs, 1 for runtime failures.
    pub fn exit_code(&self) -> u8 {
        use fclt_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidParameter { .. } | E::NonFinite { .. } | E::Config(_) | E::NoNormingFormula(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;

pub fn exit_code(result: &Result<RunOutcome, CliError>) -> ExitCode {
    match result {
        Ok(o) if o.passed => ExitCode::from(EXIT_PASS),
        Ok(_) => ExitCode::from(EXIT_FAIL),
        Err(e) => ExitCode::from(e.exit_code()),
    }
}
