//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Every key has a default, so a file only lists what differs. Keys of the
//! form `variant.<name>.<key>` define named overlays; each variant is run as
//! a separate curve on top of the base settings.

use std::collections::BTreeMap;
use std::fmt;

/// Every recognised key with its default. `auto` means derived from other keys.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("mode", "spectrum"),
    ("atom.omega2", "1"),
    ("atom.omega3", "auto"),
    ("atom.rabi", "0.2"),
    ("atom.gamma2", "0.1"),
    ("atom.gamma_r", "0.1"),
    ("atom.gamma_l", "0"),
    ("atom.width_convention", "coupling"),
    ("waveguide.v_r", "1"),
    ("waveguide.v_l", "0"),
    ("waveguide.omega0", "0"),
    ("waveguide.wavelength", "auto"),
    ("chain.n", "1"),
    ("chain.lattice_constant", "0.5"),
    ("sweep.axis", "omega"),
    ("sweep.start", "0.8"),
    ("sweep.stop", "1.2"),
    ("sweep.points", "2000"),
    ("ensemble.realizations", "10000"),
    ("ensemble.seed", "0"),
    ("ensemble.omega", "auto"),
    ("ensemble.n_list", "10,20,40,80"),
    ("disorder.kind", "frequency"),
    ("disorder.mean", "0"),
    ("disorder.sigma", "0"),
    ("bands.model", "symmetric"),
    ("bands.lattice_constants", "auto"),
];

const VARIANT_PREFIX: &str = "variant.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn new(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line,
            key: key.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key '{key}': ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    entries: BTreeMap<String, Entry>,
    variants: Vec<(String, BTreeMap<String, Entry>)>,
}

impl Default for Settings {
    fn default() -> Self {
        let entries = DEFAULTS
            .iter()
            .map(|(k, v)| {
                (
                    k.to_string(),
                    Entry {
                        value: v.to_string(),
                        line: None,
                    },
                )
            })
            .collect();
        Self {
            entries,
            variants: Vec::new(),
        }
    }
}

fn is_known(key: &str) -> bool {
    DEFAULTS.iter().any(|(k, _)| *k == key)
}

impl Settings {
    /// Defaults overlaid with the assignments in `text`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Self::default();
        s.merge(text)?;
        Ok(s)
    }

    /// Applies every assignment in `text` on top of the current values.
    pub fn merge(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::new(
                    Some(line),
                    None,
                    format!("expected 'key = value', got '{content}'"),
                ));
            };
            self.assign(key.trim(), value.trim(), Some(line))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(ConfigError::new(
                None,
                None,
                format!("override must look like key=value, got '{assignment}'"),
            ));
        };
        self.assign(key.trim(), value.trim(), None)
    }

    fn assign(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        let entry = Entry {
            value: value.to_string(),
            line,
        };
        if let Some(rest) = key.strip_prefix(VARIANT_PREFIX) {
            let Some((name, inner)) = rest.split_once('.') else {
                return Err(ConfigError::new(
                    line,
                    Some(key),
                    "variant keys look like variant.<name>.<key>",
                ));
            };
            if name.is_empty() || !is_known(inner) || inner == "mode" {
                return Err(ConfigError::new(line, Some(key), "unknown variant key"));
            }
            let slot = match self.variants.iter().position(|(n, _)| n == name) {
                Some(i) => i,
                None => {
                    self.variants.push((name.to_string(), BTreeMap::new()));
                    self.variants.len() - 1
                }
            };
            self.variants[slot].1.insert(inner.to_string(), entry);
            return Ok(());
        }
        if !is_known(key) {
            return Err(ConfigError::new(line, Some(key), "unknown key"));
        }
        self.entries.insert(key.to_string(), entry);
        Ok(())
    }

    /// Named overlays in definition order, or a single unnamed copy.
    pub fn variants(&self) -> Vec<(String, Settings)> {
        if self.variants.is_empty() {
            return vec![(String::new(), self.clone())];
        }
        self.variants
            .iter()
            .map(|(name, overlay)| {
                let mut s = Settings {
                    entries: self.entries.clone(),
                    variants: Vec::new(),
                };
                for (k, e) in overlay {
                    s.entries.insert(k.clone(), e.clone());
                }
                (name.clone(), s)
            })
            .collect()
    }

    pub fn has_variants(&self) -> bool {
        !self.variants.is_empty()
    }

    fn entry(&self, key: &str) -> &Entry {
        self.entries
            .get(key)
            .unwrap_or_else(|| panic!("'{key}' is not a configuration key"))
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.entry(key).line, Some(key), message)
    }

    pub fn get_str(&self, key: &str) -> &str {
        &self.entry(key).value
    }

    pub fn is_auto(&self, key: &str) -> bool {
        self.get_str(key) == "auto"
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.get_str(key);
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(self.error(key, format!("expected a finite number, got '{v}'"))),
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.get_str(key);
        v.parse::<u64>()
            .map_err(|_| self.error(key, format!("expected a nonnegative integer, got '{v}'")))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.get_str(key);
        v.parse::<usize>()
            .map_err(|_| self.error(key, format!("expected a nonnegative integer, got '{v}'")))
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.get_str(key)
            .split(',')
            .map(|s| match s.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(self.error(
                    key,
                    format!("expected a comma-separated list of numbers, got '{s}'"),
                )),
            })
            .collect()
    }

    pub fn get_usize_list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        self.get_str(key)
            .split(',')
            .map(|s| {
                s.trim().parse::<usize>().map_err(|_| {
                    self.error(
                        key,
                        format!("expected a comma-separated list of integers, got '{s}'"),
                    )
                })
            })
            .collect()
    }

    /// Parses the value with `FromStr`, reporting failures against `key`.
    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get_str(key)
            .parse::<T>()
            .map_err(|e| self.error(key, e.to_string()))
    }

    /// Error attributed to `key` for checks made after parsing.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        self.error(key, message)
    }

    /// All keys with their effective values.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, e)| (k.clone(), e.value.clone()))
            .collect()
    }
}
