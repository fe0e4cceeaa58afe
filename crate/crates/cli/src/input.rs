//! Readers for data files and for the CSV files this tool writes.

use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;

use crate::error::{CliError, Result};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn bad(path: &Path, line: u64, msg: impl Into<String>) -> CliError {
    CliError::Input { path: path.to_path_buf(), line, msg: msg.into() }
}

/// One value per row. Blank lines and `#` comments are skipped, and a
/// non-numeric first row is taken as a header.
fn read_column<T: FromStr>(path: &Path, what: &str, ok: impl Fn(&T) -> bool) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(open(path)?);
    let mut out = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            bad(path, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 1 {
            return Err(bad(path, line, format!("expected one column, found {}", rec.len())));
        }
        let field = &rec[0];
        match field.parse::<T>() {
            Ok(v) if ok(&v) => out.push(v),
            Ok(_) => return Err(bad(path, line, format!("`{field}` is not a {what}"))),
            Err(_) if first && field.chars().any(|c| c.is_ascii_alphabetic()) && field.parse::<f64>().is_err() => {}
            Err(_) => return Err(bad(path, line, format!("`{field}` is not a {what}"))),
        }
        first = false;
    }
    if out.is_empty() {
        return Err(bad(path, 1, "no data rows"));
    }
    Ok(out)
}

pub fn read_counts(path: &Path) -> Result<Vec<u64>> {
    read_column(path, "non-negative integer count", |_| true)
}

pub fn read_positive_reals(path: &Path) -> Result<Vec<f64>> {
    read_column(path, "positive finite number", |x: &f64| *x > 0.0 && x.is_finite())
}

/// Rows of a headed CSV file deserialized by column name.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                bad(path, line, e.to_string())
            })
        })
        .collect()
}
