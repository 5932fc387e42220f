//! Flat `key = value` configuration text.
//!
//! One pair per line, `#` comments and blank lines ignored. On duplicate
//! keys the last assignment wins.

use crate::error::{Error, Result};

/// Parse flat key-value text into ordered pairs.
pub fn parse_flat_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "config line {}: expected `key = value`, got {line:?}",
                i + 1
            )));
        };
        let key = k.trim().to_owned();
        let value = v.trim().to_owned();
        if key.is_empty() {
            return Err(Error::Config(format!("config line {}: empty key", i + 1)));
        }
        match out.iter_mut().find(|(existing, _)| *existing == key) {
            Some((_, slot)) => *slot = value,
            None => out.push((key, value)),
        }
    }
    Ok(out)
}
