//! On-disk formats: data CSVs, groups files, truth files and model files.
//!
//! Every parser takes the whole file contents and reports failures with the
//! 1-based line they occurred on, when there is one.

mod data;
mod groups;
mod model;
mod truth;

use std::fmt;

pub use data::{parse_table, write_dataset, Table};
pub use groups::{parse_groups, parse_group_lines, write_groups};
pub use model::{load_model, save_model, SCHEMA_VERSION};
pub use truth::{parse_truth, write_truth, Truth};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    pub(crate) fn whole(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

/// Parses a comma-separated list of 1-based indices into 0-based ones.
pub(crate) fn parse_index_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(str::trim)
        .map(|tok| match tok.parse::<usize>() {
            Ok(0) => Err("indices are 1-based; 0 is not allowed".to_string()),
            Ok(i) => Ok(i - 1),
            Err(_) if tok.is_empty() => Err("empty index".to_string()),
            Err(_) => Err(format!("invalid index {tok:?}")),
        })
        .collect()
}
