//! Line-oriented `key = value` configuration files.
//!
//! ```text
//! # comment
//! command = cycle
//!
//! [potential_h]
//! shape = harmonic
//! omega = 2
//!
//! potential_c.shape = harmonic   # dotted keys work outside sections too
//! potential_c.omega = 1
//! ```
//!
//! A `[name]` header prefixes every following key with `name.`. Lists are
//! comma separated, and `start:stop:count` expands to `count` evenly spaced
//! values including both ends.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "`{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Parsed file. Lookups are recorded so unread keys can be reported, and
/// every value actually used (including defaults) ends up in `resolved`.
#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    lines: BTreeMap<String, usize>,
    used: RefCell<BTreeSet<String>>,
    resolved: RefCell<BTreeMap<String, String>>,
    notices: RefCell<Vec<String>>,
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_error("", format!("line {lineno}: unterminated section header")))?
                    .trim();
                if name.is_empty() || !name.chars().all(valid_key_char) {
                    return Err(config_error("", format!("line {lineno}: bad section name `{name}`")));
                }
                section = format!("{name}.");
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_error("", format!("line {lineno}: expected `key = value`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(valid_key_char) {
                return Err(config_error("", format!("line {lineno}: bad key `{k}`")));
            }
            let key = format!("{section}{k}");
            if let Some(first) = cfg.lines.get(&key) {
                return Err(config_error(&key, format!("set twice (lines {first} and {lineno})")));
            }
            cfg.lines.insert(key.clone(), lineno);
            cfg.values.insert(key, v.to_string());
        }
        Ok(cfg)
    }
}

fn valid_key_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-'
}

impl Config {
    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.borrow_mut().insert(key.to_string(), value);
    }

    pub fn notice(&self, message: String) {
        log::info!("{message}");
        self.notices.borrow_mut().push(message);
    }

    pub fn string(&self, key: &str) -> Result<String, ConfigError> {
        let v = self.raw(key).ok_or_else(|| config_error(key, "required"))?.to_string();
        self.record(key, v.clone());
        Ok(v)
    }

    pub fn string_or(&self, key: &str, default: &str) -> String {
        let v = self.raw(key).unwrap_or(default).to_string();
        self.record(key, v.clone());
        v
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let raw = self.raw(key).ok_or_else(|| config_error(key, "required"))?;
        let v = parse_number(key, raw)?;
        self.record(key, format_value(v));
        Ok(v)
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.has(key) {
            self.f64(key).map(Some)
        } else {
            self.raw(key);
            Ok(None)
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(match self.f64_opt(key)? {
            Some(v) => v,
            None => {
                self.record(key, format_value(default));
                default
            }
        })
    }

    /// Like [`Config::f64_or`], but logs a notice when the default is used.
    pub fn f64_or_notice(&self, key: &str, default: f64, what: &str) -> Result<f64, ConfigError> {
        if !self.has(key) {
            self.notice(format!("{key} not set; using the default {what} = {default:e}"));
        }
        self.f64_or(key, default)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let v = match self.raw(key) {
            Some(raw) => raw
                .parse::<usize>()
                .map_err(|_| config_error(key, format!("expected a non-negative integer, got `{raw}`")))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        let v = match self.raw(key) {
            Some(raw) => raw
                .parse::<u64>()
                .map_err(|_| config_error(key, format!("expected a non-negative integer, got `{raw}`")))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn grid(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.raw(key).ok_or_else(|| config_error(key, "required"))?;
        let v = parse_grid(key, raw)?;
        self.record(key, v.iter().map(|x| format_value(*x)).collect::<Vec<_>>().join(", "));
        Ok(v)
    }

    pub fn grid_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        if self.has(key) {
            self.grid(key)
        } else {
            self.raw(key);
            self.record(key, default.iter().map(|x| format_value(*x)).collect::<Vec<_>>().join(", "));
            Ok(default.to_vec())
        }
    }

    /// Keys present in the file that were never looked up.
    pub fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.values.keys().filter(|k| !used.contains(*k)).cloned().collect()
    }

    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }

    pub fn notices(&self) -> Vec<String> {
        self.notices.borrow().clone()
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}

fn parse_number(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| config_error(key, format!("expected a number, got `{raw}`")))?;
    if !v.is_finite() {
        return Err(config_error(key, format!("must be finite, got `{raw}`")));
    }
    Ok(v)
}

/// Comma-separated numbers, or `start:stop:count`.
pub fn parse_grid(key: &str, raw: &str) -> Result<Vec<f64>, ConfigError> {
    let raw = raw.trim();
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(config_error(key, "range must be `start:stop:count`"));
        }
        let a = parse_number(key, parts[0])?;
        let b = parse_number(key, parts[1])?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| config_error(key, format!("range count must be an integer, got `{}`", parts[2])))?;
        return match n {
            0 => Err(config_error(key, "range count must be >= 1")),
            1 => Ok(vec![a]),
            _ => Ok((0..n)
                .map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
                .collect()),
        };
    }
    let v = raw
        .split(',')
        .map(|s| parse_number(key, s))
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err(config_error(key, "empty list"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_dotted_keys() {
        let c: Config = "command = cycle\n[a]\nx = 1.5 # note\nb.y = 2\n".parse().unwrap();
        assert_eq!(c.string("command").unwrap(), "cycle");
        assert_eq!(c.f64("a.x").unwrap(), 1.5);
        assert_eq!(c.f64("a.b.y").unwrap(), 2.0);
        assert!(c.unused().is_empty());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!("x".parse::<Config>().is_err());
        assert!("[a\nx=1".parse::<Config>().is_err());
        let e = "x = 1\nx = 2".parse::<Config>().unwrap_err();
        assert_eq!(e.key, "x");
        let c: Config = "x = nan\ny = abc".parse().unwrap();
        assert!(c.f64("x").is_err());
        assert_eq!(c.f64("y").unwrap_err().key, "y");
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("g", "0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("g", "1, 2,3e0").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("g", "2:9:1").unwrap(), vec![2.0]);
        assert!(parse_grid("g", "0:1").is_err());
        assert!(parse_grid("g", "0:1:0").is_err());
    }

    #[test]
    fn defaults_are_recorded() {
        let c: Config = "".parse().unwrap();
        assert_eq!(c.f64_or("solver.rel_tol", 1e-9).unwrap(), 1e-9);
        assert_eq!(c.f64_or_notice("sweep.lattice", 185e-9, "lattice period").unwrap(), 185e-9);
        assert_eq!(c.resolved()["solver.rel_tol"], "1e-9");
        assert_eq!(c.notices().len(), 1);
    }
}
