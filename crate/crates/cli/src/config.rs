use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use intdef_core::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Records,
}

impl Format {
    fn parse(s: &str) -> Result<Format> {
        match s {
            "text" => Ok(Format::Text),
            "records" => Ok(Format::Records),
            _ => Err(Error::Config(format!("unknown format {s:?}, expected text or records"))),
        }
    }
}

/// Search bounds and output settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub format: Format,
    pub seed: u64,
    /// Norm bound for prime tables and label checks.
    pub prime_bound: u64,
    /// Attempts for randomized searches.
    pub retries: usize,
    /// Coordinate bound for candidate searches.
    pub candidate_bound: i64,
    /// Height bound for explicit quaternions; `None` picks one per field.
    pub quaternion_height: Option<u64>,
    /// Sample count for randomized audits.
    pub samples: usize,
    /// Height bound for the dual-route audit.
    pub audit_height: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format: Format::Text,
            seed: 0,
            prime_bound: 10_000,
            retries: 20_000,
            candidate_bound: 6,
            quaternion_height: None,
            samples: 50,
            audit_height: 3,
        }
    }
}

fn positive<T: std::str::FromStr + PartialOrd + Default>(key: &str, v: &str) -> Result<T> {
    let n: T = v
        .parse()
        .map_err(|_| Error::Config(format!("{key}: {v:?} is not a number")))?;
    if n <= T::default() {
        return Err(Error::Config(format!("{key} must be positive")));
    }
    Ok(n)
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "format" => self.format = Format::parse(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("seed: {value:?} is not a number")))?
            }
            "prime-bound" => self.prime_bound = positive(key, value)?,
            "retries" => self.retries = positive(key, value)?,
            "candidate-bound" => self.candidate_bound = positive(key, value)?,
            "quaternion-height" => self.quaternion_height = Some(positive(key, value)?),
            "samples" => self.samples = positive(key, value)?,
            "audit-height" => self.audit_height = positive(key, value)?,
            _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Reads a `key = value` file; `#` starts a comment.
    pub fn load(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut seen = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if seen.insert(k.to_string(), n + 1).is_some() {
                return Err(Error::Config(format!("{}:{}: duplicate key {k}", path.display(), n + 1)));
            }
            self.set(k, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_bounds() {
        let mut c = RunConfig::default();
        assert!(c.set("prime-bound", "0").is_err());
        assert!(c.set("retries", "-3").is_err());
        c.set("seed", "0").unwrap();
        c.set("format", "records").unwrap();
        assert_eq!(c.format, Format::Records);
        assert!(c.set("colour", "blue").is_err());
    }
}
