//! Flat key-value experiment configs with `[section]` headers.
//!
//! Parse errors carry line context. All values are strings here; typed
//! access with defaults lives on [`Config`], and every consumed key is
//! tracked so unknown keys can be reported.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use crate::{CliError, Result};

/// Parsed configuration: `section.key -> value` plus source line numbers.
#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, (String, usize)>,
    consumed: Mutex<BTreeSet<String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    CliError::new(format!("line {lineno}: unclosed section header"))
                })?;
                section = name.trim().to_string();
                if section.is_empty() {
                    return Err(CliError::new(format!("line {lineno}: empty section name")));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::new(format!(
                    "line {lineno}: expected `key = value`, got `{line}`"
                ))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::new(format!("line {lineno}: empty key")));
            }
            if section.is_empty() {
                return Err(CliError::new(format!(
                    "line {lineno}: key `{key}` appears before any [section]"
                )));
            }
            let full = format!("{section}.{key}");
            if entries.contains_key(&full) {
                return Err(CliError::new(format!(
                    "line {lineno}: duplicate key `{full}`"
                )));
            }
            entries.insert(full, (value.trim().to_string(), lineno));
        }
        Ok(Self {
            entries,
            consumed: Mutex::new(BTreeSet::new()),
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.consumed.lock().unwrap().insert(key.to_string());
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map(|(_, l)| *l).unwrap_or(0)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| CliError::new(format!("missing required config key `{key}`")))
    }

    pub fn parse_typed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::new(format!("line {}: key `{key}`: {e}", self.line_of(key)))
            }),
        }
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parse_typed::<f64>(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.parse_typed::<f64>(key)?
            .ok_or_else(|| CliError::new(format!("missing required config key `{key}`")))
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parse_typed::<usize>(key)?.unwrap_or(default))
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.parse_typed::<u64>(key)?.unwrap_or(default))
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(other) => Err(CliError::new(format!(
                "line {}: key `{key}`: expected a boolean, got `{other}`",
                self.line_of(key)
            ))),
        }
    }

    /// Comma-separated floats.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|p| {
                    p.trim().parse::<f64>().map_err(|e| {
                        CliError::new(format!("line {}: key `{key}`: {e}", self.line_of(key)))
                    })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    /// Comma-separated usize list.
    pub fn get_usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|p| {
                    p.trim().parse::<usize>().map_err(|e| {
                        CliError::new(format!("line {}: key `{key}`: {e}", self.line_of(key)))
                    })
                })
                .collect::<Result<Vec<usize>>>()
                .map(Some),
        }
    }

    /// Keys of one section, in file order of appearance is not preserved;
    /// sorted order is (deterministic).
    pub fn section_keys(&self, section: &str) -> Vec<String> {
        let prefix = format!("{section}.");
        self.entries
            .keys()
            .filter(|k| k.starts_with(&prefix))
            .cloned()
            .collect()
    }

    /// Errors on any key never read by the experiment, to catch typos.
    pub fn check_unknown_keys(&self) -> Result<()> {
        let consumed = self.consumed.lock().unwrap();
        for (key, (_, lineno)) in &self.entries {
            if !consumed.contains(key) {
                return Err(CliError::new(format!(
                    "line {lineno}: unknown config key `{key}`"
                )));
            }
        }
        Ok(())
    }

    /// Everything as sorted `key = value` pairs for provenance echoes.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, (v, _))| (k.clone(), v.clone()))
            .collect()
    }
}
