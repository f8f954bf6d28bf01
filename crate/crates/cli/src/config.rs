//! Flat `key = value` campaign configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Ordered key/value pairs. Lists are written `a,b,c`; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("line {}: expected key = value", i + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if key.is_empty() || !key.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
            return Err(err(format!("bad key {key:?}")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| err(format!("expected key=value, got {assignment:?}")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// Errors on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for k in self.keys() {
            if !allowed.contains(&k) {
                return Err(err(format!("unknown key {k:?}")));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| err(format!("{key} = {v:?}: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let v = self.raw(key).ok_or_else(|| err(format!("missing key {key:?}")))?;
        v.parse().map_err(|e| err(format!("{key} = {v:?}: {e}")))
    }

    /// Comma-separated list; must be nonempty.
    pub fn list<T>(&self, key: &str, default: &[T]) -> Result<Vec<T>, ConfigError>
    where
        T: FromStr + Clone,
        T::Err: fmt::Display,
    {
        let Some(v) = self.raw(key) else { return Ok(default.to_vec()) };
        let out = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| err(format!("{key}: {s:?}: {e}"))))
            .collect::<Result<Vec<T>, _>>()?;
        if out.is_empty() {
            return Err(err(format!("{key} must not be empty")));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_comments() {
        let c = Config::parse("# campaign\nn = 16,32, 64\nseed=7 # master\n\ndist = bernoulliAtom(0.4,1)\n").unwrap();
        assert_eq!(c.list::<usize>("n", &[]).unwrap(), vec![16, 32, 64]);
        assert_eq!(c.get("seed", 0u64).unwrap(), 7);
        assert_eq!(c.raw("dist"), Some("bernoulliAtom(0.4,1)"));
        assert_eq!(c.get("replicas", 5usize).unwrap(), 5);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(Config::parse("no equals sign").is_err());
        assert!(Config::parse("bad key = 1").is_err());
        let c = Config::parse("n = 1,x").unwrap();
        assert!(c.list::<usize>("n", &[]).is_err());
        assert!(Config::parse("n = ,").unwrap().list::<usize>("n", &[]).is_err());
        assert!(c.check_keys(&["seed"]).is_err());
    }
}
