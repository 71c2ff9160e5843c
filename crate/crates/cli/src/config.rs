//! Flat `key = value` config files.
//!
//! One setting per line, `#` starts a comment, keys use the long flag names
//! (`alpha-n` and `alpha_n` are the same key). Flags given on the command line
//! take precedence over the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        text.parse()
            .with_context(|| format!("in config {}", path.display()))
    }

    /// Value for `key` parsed as `T`, if present.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.values.get(&normalize(key)) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config key {key}: cannot parse {raw:?}: {e}")),
        }
    }

    /// `flag` if set, else the config value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    /// Fails on keys outside `known`, so typos don't silently fall back to
    /// defaults.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !known.contains(&key.as_str()) {
                bail!("unknown config key {key:?}");
            }
        }
        Ok(())
    }
}

impl FromStr for Config {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            if values
                .insert(normalize(key), value.trim().to_string())
                .is_some()
            {
                bail!("line {}: duplicate key {}", i + 1, key.trim());
            }
        }
        Ok(Config { values })
    }
}
