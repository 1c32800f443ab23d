//! File formats, SVG rendering, the book importer and the bench harness.

pub mod bench;
pub mod book;
mod instance_file;
mod solution_file;
pub mod svg;

use std::path::PathBuf;

use thiserror::Error;

use crate::crossings::CrossingError;
use crate::drawing::Violation;
use crate::instance::InstanceError;

pub use instance_file::{instance_to_string, parse_instance, parse_instance_str, write_instance, CharacterEntry, InstanceFile};
pub use solution_file::{read_solution, read_solution_str, solution_to_string, write_solution, SolutionFile, SolutionReport};
pub use svg::{render_svg, CurveStyle, RenderSpec};

/// Current schema version of instance and solution files.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("solution does not fit the instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Crossings(#[from] CrossingError),
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }

    /// Syntax errors carry a 1-based position computed from the byte span.
    pub(crate) fn from_toml(text: &str, err: toml::de::Error) -> Self {
        let (line, col) = match err.span() {
            Some(span) => line_col(text, span.start),
            None => (1, 1),
        };
        IoError::Syntax {
            line,
            col,
            message: err.message().to_string(),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, col)
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

pub(crate) fn write_text(path: &std::path::Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}
