// SPDX-License-Identifier: MIT OR Apache-2.0

//! Input series parsing: one value per line, or `index,value` rows with an
//! optional header line.

use std::path::Path;

/// Reads a numeric series, skipping blank lines and an auto-detected header.
/// Parse failures after the first data row are errors that name the line.
pub fn read_series(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| format!("cannot read {}: {err}", path.display()))?;
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match parse_row(line) {
            Some(value) => {
                values.push(value);
                header_allowed = false;
            }
            None if header_allowed => {
                // first non-blank line that does not parse: a header
                header_allowed = false;
            }
            None => {
                return Err(format!(
                    "{}: line {}: not a numeric value: {line:?}",
                    path.display(),
                    index + 1
                ));
            }
        }
    }
    if values.is_empty() {
        return Err(format!("{}: no numeric data found", path.display()));
    }
    Ok(values)
}

/// `value` or `index,value`; returns the value column.
fn parse_row(line: &str) -> Option<f64> {
    let mut parts = line.split(',');
    let first = parts.next()?;
    match parts.next() {
        None => first.trim().parse().ok().filter(|v: &f64| v.is_finite()),
        Some(second) => {
            if parts.next().is_some() {
                return None; // three or more columns is not a series row
            }
            second.trim().parse().ok().filter(|v: &f64| v.is_finite())
        }
    }
}
