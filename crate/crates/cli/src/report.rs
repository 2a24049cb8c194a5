//! Assertion records and CSV output.

use crate::CliError;
use std::fs;
use std::path::{Path, PathBuf};

pub const ASSERTIONS_CSV_HEADER: [&str; 4] = ["name", "relation", "measured", "passed"];

/// One checked relation, written to the assertions file of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub relation: String,
    pub measured: f64,
    pub passed: bool,
}

impl Assertion {
    /// `measured <= limit`.
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), relation: format!("<= {limit:e}"), measured, passed: measured <= limit }
    }

    /// `measured >= limit`.
    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), relation: format!(">= {limit:e}"), measured, passed: measured >= limit }
    }

    pub fn with_relation(name: impl Into<String>, relation: impl Into<String>, measured: f64, passed: bool) -> Self {
        Self { name: name.into(), relation: relation.into(), measured, passed }
    }
}

/// Files written and assertions checked by one command.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub assertions: Vec<Assertion>,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

/// Writes `header` and pre-formatted `rows` verbatim.
pub fn write_rows(path: &Path, header: &str, rows: &[String]) -> Result<PathBuf, CliError> {
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}

pub fn write_assertions(path: &Path, assertions: &[Assertion]) -> Result<PathBuf, CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ASSERTIONS_CSV_HEADER)?;
    for a in assertions {
        w.write_record([
            a.name.as_str(),
            a.relation.as_str(),
            &format!("{:.12e}", a.measured),
            if a.passed { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}
