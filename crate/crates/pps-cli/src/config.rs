//! Flag / config-file / default resolution.
//!
//! Precedence: CLI flags beat the TOML config file, which beats built-in
//! defaults. The config file mirrors the command tree, e.g.
//!
//! ```toml
//! [generate.poisson]
//! rate = 1.0
//! duration = 1e6
//! ```
//!
//! Every resolved value is recorded so commands can echo their effective
//! configuration into output headers.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                let table: toml::Table = text
                    .parse()
                    .with_context(|| format!("parsing config file {}", p.display()))?;
                Ok(ConfigFile { table })
            }
        }
    }

    fn lookup(&self, section: &str, key: &str) -> Option<&toml::Value> {
        let mut node: &toml::Value = self.table.get(section.split('.').next()?)?;
        for part in section.split('.').skip(1) {
            node = node.get(part)?;
        }
        node.get(key)
    }
}

/// Resolves one command's parameters and remembers the effective values.
pub struct Resolver<'a> {
    cfg: &'a ConfigFile,
    section: String,
    effective: Vec<(String, String)>,
}

impl<'a> Resolver<'a> {
    pub fn new(cfg: &'a ConfigFile, section: &str) -> Self {
        Resolver {
            cfg,
            section: section.to_string(),
            effective: vec![("command".into(), section.to_string())],
        }
    }

    /// Everything resolved so far, for output headers.
    pub fn effective(&self) -> &[(String, String)] {
        &self.effective
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.effective.push((key.to_string(), value.to_string()));
    }

    fn config_value(&self, key: &str) -> Option<&toml::Value> {
        self.cfg.lookup(&self.section, key)
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>) -> Result<f64> {
        let v = match flag {
            Some(v) => v,
            None => self
                .config_f64(key)?
                .ok_or_else(|| self.missing(key))?,
        };
        self.record(key, v);
        Ok(v)
    }

    pub fn f64_or(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        let v = match flag {
            Some(v) => v,
            None => self.config_f64(key)?.unwrap_or(default),
        };
        self.record(key, v);
        Ok(v)
    }

    pub fn u64_or(&mut self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        let v = match flag {
            Some(v) => v,
            None => self.config_u64(key)?.unwrap_or(default),
        };
        self.record(key, v);
        Ok(v)
    }

    pub fn u64(&mut self, key: &str, flag: Option<u64>) -> Result<u64> {
        let v = match flag {
            Some(v) => v,
            None => self
                .config_u64(key)?
                .ok_or_else(|| self.missing(key))?,
        };
        self.record(key, v);
        Ok(v)
    }

    pub fn usize_or(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize> {
        Ok(self.u64_or(key, flag.map(|v| v as u64), default as u64)? as usize)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>) -> Result<usize> {
        Ok(self.u64(key, flag.map(|v| v as u64))? as usize)
    }

    pub fn string(&mut self, key: &str, flag: Option<String>) -> Result<String> {
        let v = match flag {
            Some(v) => v,
            None => match self.config_value(key) {
                Some(toml::Value::String(s)) => s.clone(),
                Some(other) => bail!("config {}.{key} must be a string, got {other}", self.section),
                None => return Err(self.missing(key)),
            },
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
        let v = match flag {
            Some(v) => v,
            None => match self.config_value(key) {
                Some(toml::Value::String(s)) => PathBuf::from(s),
                Some(other) => bail!("config {}.{key} must be a string, got {other}", self.section),
                None => return Err(self.missing(key)),
            },
        };
        self.record(key, v.display());
        Ok(v)
    }

    fn config_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.config_value(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => bail!("config {}.{key} must be a number, got {other}", self.section),
        }
    }

    fn config_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.config_value(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => bail!(
                "config {}.{key} must be a non-negative integer, got {other}",
                self.section
            ),
        }
    }

    fn missing(&self, key: &str) -> anyhow::Error {
        anyhow!(
            "missing parameter --{key} for `{}` (not on the command line nor in the config file)",
            self.section.replace('.', " ")
        )
    }
}
