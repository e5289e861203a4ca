use std::collections::BTreeMap;
use std::path::PathBuf;

use derivkit::gen::Shortfall;
use derivkit::record::SCHEMA_VERSION;
use serde::Serialize;
use thiserror::Error;

/// Exit status when every record was processed.
pub const EXIT_OK: u8 = 0;
/// Some records failed or could not be produced; see the run report.
pub const EXIT_RECORDS: u8 = 1;
/// Invalid arguments or configuration.
pub const EXIT_USAGE: u8 = 2;
/// A file could not be read or written.
pub const EXIT_IO: u8 = 3;

/// Failures that stop a command before or while writing its output.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(path: impl Into<PathBuf>, message: impl ToString) -> CliError {
        CliError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// One record that could not be processed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordIssue {
    /// 1-based input line, when the record came from a file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    pub kind: String,
    pub message: String,
}

/// Machine-readable summary of a command run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub read: usize,
    pub written: usize,
    /// Records left out on purpose (filters), by reason.
    pub skipped: BTreeMap<String, usize>,
    pub errors: Vec<RecordIssue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shortfall: Option<Shortfall>,
}

impl RunReport {
    pub fn new(command: &str) -> RunReport {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            read: 0,
            written: 0,
            skipped: BTreeMap::new(),
            errors: Vec::new(),
            shortfall: None,
        }
    }

    pub fn skip(&mut self, reason: &str) {
        *self.skipped.entry(reason.to_string()).or_default() += 1;
    }

    pub fn error(&mut self, line: Option<usize>, id: Option<u64>, kind: &str, message: impl ToString) {
        self.errors.push(RecordIssue {
            line,
            id,
            kind: kind.to_string(),
            message: message.to_string(),
        });
    }

    pub fn exit_code(&self) -> u8 {
        let short = self.shortfall.as_ref().is_some_and(|s| s.produced < s.requested);
        if self.errors.is_empty() && !short {
            EXIT_OK
        } else {
            EXIT_RECORDS
        }
    }
}
