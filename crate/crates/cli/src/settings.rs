//! `key = value` configuration files. Keys use the long flag names
//! (`R`, `L`, `kappa`, `max-iters`, ...); `_` and `-` are interchangeable.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected `key = value`",
                    k + 1
                )));
            };
            let key = normalize(key);
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", k + 1)));
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Usage(format!("config key `{key}` given twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Rejects keys the command does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }

    /// The flag if given, else the file entry, else `None`.
    pub fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
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
                v.parse()
                    .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing --{key}")))
    }

    /// Boolean switches: the flag wins when set, otherwise the file decides.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.get::<bool>(None, key)?.unwrap_or(false))
    }
}
