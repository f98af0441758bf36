//! Flat `key = value` configuration files for `bench`.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are the long
//! flag names without the leading dashes (`sf`, `runs`, `queries`, `log-base`,
//! ...); list values are comma-separated.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use kwbench::{Error, Result};

pub const KEYS: [&str; 18] = [
    "sf", "runs", "queries", "schemes", "layouts", "strategies", "seed", "corpus-seed", "corpus",
    "fixed-binding", "k", "tf-k", "k1", "b", "log-base", "scope", "out", "format",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Parse { line: i + 1, message: format!("unknown key `{key}`") });
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Parse { line: i + 1, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(ConfigFile { values })
    }

    /// The flag value when given, else the parsed file value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidArgument(format!("config `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn pick_list<T>(&self, flag: Option<Vec<T>>, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|e| Error::InvalidArgument(format!("config `{key}`: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }
}
