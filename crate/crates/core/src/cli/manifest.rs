use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::CliError;

/// Ordered key=value run record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Manifest::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self
            .get(key)
            .ok_or_else(|| CliError::Input(format!("manifest is missing `{key}`")))?;
        raw.parse()
            .map_err(|_| CliError::Input(format!("manifest value for `{key}` is invalid: {raw:?}")))
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# hbutterfly run manifest\n");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut seen = BTreeMap::new();
        let mut m = Manifest::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("manifest line {}: expected key=value", i + 1)))?;
            let k = k.trim();
            if seen.insert(k.to_string(), ()).is_some() {
                return Err(CliError::Input(format!("manifest line {}: duplicate key `{k}`", i + 1)));
            }
            m.set(k, v.trim());
        }
        Ok(m)
    }
}
