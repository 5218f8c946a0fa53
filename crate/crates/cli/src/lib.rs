//! Command-line driver: configuration parsing, experiment orchestration and
//! CSV reporting for the collapse library.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

use std::fs;
use std::path::Path;

pub use commands::{run_analyze, run_simulate, run_tail, Report};
pub use config::{parse_config, Engine, RunConfig, Suite};
pub use error::{CliError, Result};
pub use validate::{run_validate, Check, Validation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Simulate,
    Validate,
    Tail,
}

pub fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    RunConfig::parse(&text, seed)
}

/// Runs one command. Failed validation checks still produce a report, and
/// are returned as [`CliError::ChecksFailed`] after it.
pub fn dispatch(cmd: Command, cfg: &RunConfig, out: Option<&Path>) -> (Option<Report>, Result<()>) {
    let result = match cmd {
        Command::Analyze => run_analyze(cfg, out),
        Command::Simulate => run_simulate(cfg, out),
        Command::Tail => run_tail(cfg, out),
        Command::Validate => {
            return match run_validate(cfg, out) {
                Ok(v) => {
                    let failed = v.failed();
                    let total = v.checks.len();
                    let status = if failed == 0 {
                        Ok(())
                    } else {
                        Err(CliError::ChecksFailed { failed, total })
                    };
                    (Some(v.report), status)
                }
                Err(e) => (None, Err(e)),
            }
        }
    };
    match result {
        Ok(r) => (Some(r), Ok(())),
        Err(e) => (None, Err(e)),
    }
}
