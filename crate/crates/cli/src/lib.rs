//! Command-line front end: coefficient traces, fringe studies, Zeno maps and
//! oracle certification, driven by a flat `key = value` configuration.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::path::Path;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn config(key: &str, value: &str, reason: &str) -> Self {
        CliError::Usage(format!("config key `{key}` = `{value}`: {reason}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Clean,
    /// Some cells or sweeps failed; the rest was written.
    Partial,
    CertificationFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Clean => 0,
            Status::Partial => 2,
            Status::CertificationFailed => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Fringe,
    Zeno,
    Certify,
}

pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<Status, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    match command {
        Command::Coeffs => commands::coeffs(cfg, out),
        Command::Fringe => commands::fringe(cfg, out),
        Command::Zeno => commands::zeno(cfg, out),
        Command::Certify => commands::certify_cmd(cfg, out),
    }
}
