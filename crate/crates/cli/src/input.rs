//! Count and distribution files.
//!
//! Two layouts are accepted:
//!
//! - CSV lines `index,value` with an optional header line. The length is the
//!   smallest power of two covering the largest index; missing indices read
//!   as zero. Blank lines and `#` comments are skipped.
//! - A JSON array of numbers whose length must be a power of two.
//!
//! Values are counts (nonnegative integers) unless the caller asserts they
//! are probabilities.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use walshcap::Distribution;

use crate::CliError;

/// Largest count that `f64` represents exactly.
const MAX_EXACT_COUNT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Counts,
    Probabilities,
}

#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub values: Vec<f64>,
    pub kind: ValueKind,
    pub digest: String,
}

impl LoadedInput {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn distribution(&self) -> Result<Distribution, CliError> {
        let dist = match self.kind {
            ValueKind::Counts => {
                let counts: Vec<u64> = self.values.iter().map(|&v| v as u64).collect();
                Distribution::from_counts(&counts)
            }
            ValueKind::Probabilities => Distribution::new(self.values.clone()),
        };
        dist.map_err(CliError::from)
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

pub fn load(path: &Path, normalized: bool) -> Result<LoadedInput, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Usage(format!("{} is not UTF-8 text", path.display())))?;
    let kind = if normalized {
        ValueKind::Probabilities
    } else {
        ValueKind::Counts
    };
    let values = parse(text, kind)?;
    Ok(LoadedInput {
        values,
        kind,
        digest: digest(&bytes),
    })
}

pub fn parse(text: &str, kind: ValueKind) -> Result<Vec<f64>, CliError> {
    let values = if text.trim_start().starts_with('[') {
        parse_json(text)?
    } else {
        parse_csv(text)?
    };
    validate(&values, kind)?;
    Ok(values)
}

fn parse_json(text: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("malformed JSON array: {e}")))?;
    if values.is_empty() || !values.len().is_power_of_two() {
        return Err(CliError::Usage(format!(
            "JSON array has {} entries; the support size must be a power of two",
            values.len()
        )));
    }
    Ok(values)
}

fn parse_csv(text: &str) -> Result<Vec<f64>, CliError> {
    let mut entries = BTreeMap::new();
    let mut seen_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let malformed = || {
            CliError::Usage(format!(
                "line {}: expected `index,value`, got `{line}`",
                lineno + 1
            ))
        };
        if fields.len() != 2 {
            return Err(malformed());
        }
        let index = match fields[0].parse::<usize>() {
            Ok(i) => i,
            // a single header line is allowed before any data
            Err(_) if !seen_data && entries.is_empty() && fields[0].parse::<f64>().is_err() => {
                seen_data = true;
                continue;
            }
            Err(_) => return Err(malformed()),
        };
        seen_data = true;
        let value: f64 = fields[1].parse().map_err(|_| malformed())?;
        if entries.insert(index, value).is_some() {
            return Err(CliError::Usage(format!(
                "line {}: duplicate index {index}",
                lineno + 1
            )));
        }
    }
    let max_index = match entries.keys().next_back() {
        Some(&i) => i,
        None => return Err(CliError::Usage("input has no data lines".into())),
    };
    let len = (max_index + 1)
        .checked_next_power_of_two()
        .filter(|&len| len <= 1 << 30)
        .ok_or_else(|| CliError::Usage(format!("index {max_index} is too large")))?;
    let mut values = vec![0.0; len];
    for (i, v) in entries {
        values[i] = v;
    }
    Ok(values)
}

fn validate(values: &[f64], kind: ValueKind) -> Result<(), CliError> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(CliError::Usage(format!(
                "value {v} at index {i} must be finite and nonnegative"
            )));
        }
        if kind == ValueKind::Counts && (v.fract() != 0.0 || v > MAX_EXACT_COUNT) {
            return Err(CliError::Usage(format!(
                "value {v} at index {i} is not an integer count (pass --normalized for probabilities)"
            )));
        }
    }
    if values.iter().all(|&v| v == 0.0) {
        return Err(CliError::Usage("input has no positive entry".into()));
    }
    Ok(())
}
