//! Persistence, configuration and measurement ingestion.
//!
//! Every reader has a string-level entry point (`parse_*`) that does no file
//! IO, so malformed input can be exercised directly.

pub mod config;
pub mod dataset;
pub mod ingest;
pub mod model;
pub mod report;

use std::path::Path;

use crate::error::Result;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

/// Shortest decimal text that parses back to the identical `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| crate::Error::parse(line, format!("{what}: cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(crate::Error::parse(line, format!("{what}: value {field:?} is not finite")));
    }
    Ok(v)
}
