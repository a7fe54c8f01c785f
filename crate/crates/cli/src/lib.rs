//! Command-line surface for the spectral-attention library. Every command
//! writes CSV or JSON to `--out` or standard output.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

mod cli;
mod commands;
mod output;

pub use cli::{Cli, Command};

/// Exit status plus what was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    /// 0 success, 1 validation failure, 2 usage error.
    pub exit_code: i32,
    /// Files written by the command.
    pub files: Vec<PathBuf>,
    /// Data destined for standard output (empty when written to a file).
    pub stdout: String,
    /// One human-readable line.
    pub summary: String,
}

impl CommandResult {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION_FAILURE: i32 = 1;
    pub const USAGE_ERROR: i32 = 2;

    fn usage(text: String) -> Self {
        Self {
            exit_code: Self::USAGE_ERROR,
            files: Vec::new(),
            stdout: String::new(),
            summary: text,
        }
    }

    fn failure(summary: String) -> Self {
        Self {
            exit_code: Self::VALIDATION_FAILURE,
            files: Vec::new(),
            stdout: String::new(),
            summary,
        }
    }
}

/// Parses `argv` (program name first) and runs the selected command.
pub fn run<I, S>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandResult {
                    exit_code: CommandResult::SUCCESS,
                    files: Vec::new(),
                    stdout: text,
                    summary: String::new(),
                },
                _ => CommandResult::usage(text),
            };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(result) => result,
        Err(e) => CommandResult::failure(format!("error: {e}")),
    }
}
