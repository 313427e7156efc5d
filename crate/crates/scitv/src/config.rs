//! Flat `key=value` config files mirroring the CLI flags.
//!
//! Blank lines and `#` comments are ignored; later assignments win. Keys
//! irrelevant to the running subcommand are ignored so one file can serve a
//! whole pipeline. Command-line flags always override file values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn load_kv(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    parse_kv(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_blanks_and_overrides() {
        let text = "# solver settings\nlambda = 0.1\n\nmax-iter=200\nlambda=0.2\n";
        let map = parse_kv(text).unwrap();
        assert_eq!(map.get("lambda").unwrap(), "0.2");
        assert_eq!(map.get("max-iter").unwrap(), "200");
        assert_eq!(map.len(), 2);
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(matches!(parse_kv("lambda 0.1"), Err(Error::Config(_))));
        assert!(matches!(parse_kv("=3"), Err(Error::Config(_))));
    }
}
