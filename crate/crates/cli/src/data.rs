//! Plain-text data files: one number per line, `#` starts a comment.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: file not found")]
    FileNotFound { path: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: cannot parse `{text}` as a finite number")]
    Parse { path: String, line: usize, text: String },
    #[error("{path}: need at least {min} numbers, found {found}")]
    TooFew { path: String, min: usize, found: usize },
}

pub fn read_text(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => DataError::FileNotFound { path: path.display().to_string() },
        _ => DataError::Io { path: path.display().to_string(), source },
    })
}

/// Parse numbers from `text`. Blank lines and comments are skipped; decimal
/// points are always `.` regardless of locale.
pub fn parse_numbers(text: &str, path: &str) -> Result<Vec<f64>, DataError> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match body.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                return Err(DataError::Parse {
                    path: path.to_string(),
                    line: i + 1,
                    text: body.to_string(),
                })
            }
        }
    }
    Ok(values)
}

pub fn read_numbers(path: &Path, min: usize) -> Result<Vec<f64>, DataError> {
    let values = parse_numbers(&read_text(path)?, &path.display().to_string())?;
    if values.len() < min {
        return Err(DataError::TooFew { path: path.display().to_string(), min, found: values.len() });
    }
    Ok(values)
}
