//! Plain-text key-value run configuration.
//!
//! A config file holds `key = value` lines (`#` comments allowed). Values
//! from the file fill in whatever the command-line flags left unset, so the
//! precedence is: explicit flag, then config file, then built-in default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", ln + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Parse(format!("config key `{key}`: cannot parse `{raw}`"))),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

/// Pick the first set value: explicit flag, config file, default.
pub fn resolve<T: std::str::FromStr + Clone>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(file.get::<T>(key)?.unwrap_or(default))
}
