//! JSONL and plain-file helpers. Output goes through one buffered writer in
//! input order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;

/// A parsed JSONL line, or the parse error, tagged with its 1-based line.
pub struct Line<T> {
    pub line: usize,
    pub value: Result<T, String>,
}

/// Every non-blank line of `path`. Lines that do not parse are returned as
/// errors rather than aborting the read.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<Line<T>>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(Line {
            line: i + 1,
            value: serde_json::from_str(&line).map_err(|e| e.to_string()),
        });
    }
    Ok(out)
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<usize, CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut n = 0;
    for item in items {
        let s = serde_json::to_string(item).expect("records serialize");
        writeln!(w, "{s}").map_err(|e| CliError::io(path, e))?;
        n += 1;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(n)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
