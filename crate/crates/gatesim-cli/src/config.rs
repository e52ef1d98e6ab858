//! Flat `key = value` config files and flag > file > default resolution.

use serde::Serialize;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Values from the config file plus the record of everything resolved so far.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: Map<String, Value>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value, got '{raw}'", i + 1)))?;
        let key = normalize(k);
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { file, resolved: Map::new() })
    }

    pub fn from_map(file: BTreeMap<String, String>) -> Self {
        Self { file, resolved: Map::new() }
    }

    fn record<T: Serialize>(&mut self, key: &str, v: &T) {
        let json = serde_json::to_value(v).unwrap_or(Value::Null);
        self.resolved.insert(key.to_string(), json);
    }

    /// Flag, then config file, then `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Serialize,
        T::Err: std::fmt::Display,
    {
        let key = normalize(key);
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(&key) {
                Some(s) => Some(s.parse::<T>().map_err(|e| CliError::Usage(format!("config key '{key}': cannot parse '{s}': {e}")))?),
                None => default,
            },
        };
        if let Some(v) = &v {
            self.record(&key, v);
        }
        Ok(v)
    }

    pub fn or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Serialize,
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key, flag, Some(default))?.expect("default supplied"))
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Serialize,
        T::Err: std::fmt::Display,
    {
        self.get(key, flag, None)?
            .ok_or_else(|| CliError::Usage(format!("missing required value '--{}' (flag or config key)", key.replace('_', "-"))))
    }

    /// Boolean switch: set by the flag or by `true`/`false` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let v = if flag { true } else { self.get::<bool>(key, None, Some(false))?.unwrap_or(false) };
        self.record(&normalize(key), &v);
        Ok(v)
    }

    /// Records a derived value (e.g. a default computed from other inputs).
    pub fn note<T: Serialize>(&mut self, key: &str, v: &T) {
        self.record(&normalize(key), v);
    }

    pub fn resolved(&self) -> &Map<String, Value> {
        &self.resolved
    }
}
