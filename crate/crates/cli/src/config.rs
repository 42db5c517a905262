//! Flat `key=value` configuration: a file, then command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cmc_core::mesh::DomainSpec;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parse `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            c.set(line).map_err(|e| CliError::Usage(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(c)
    }

    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut c = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)?
            }
            None => Self::default(),
        };
        for o in overrides {
            c.set(o).map_err(CliError::Usage)?;
        }
        Ok(c)
    }

    fn set(&mut self, item: &str) -> Result<(), String> {
        let (k, v) = item.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got '{item}'"))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(format!("empty key in '{item}'"));
        }
        self.values.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    /// Fail on keys outside `allowed`, listing all of them.
    pub fn restrict(&self, allowed: &[&str]) -> Result<(), CliError> {
        let unknown: Vec<&str> = self.values.keys().map(String::as_str).filter(|k| !allowed.contains(k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("unknown keys: {} (allowed: {})", unknown.join(", "), allowed.join(", "))))
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::Usage(format!("invalid value for {key}: '{v}'"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.raw(key).ok_or_else(|| CliError::Usage(format!("missing required key {key}")))?;
        v.parse().map_err(|_| CliError::Usage(format!("invalid value for {key}: '{v}'")))
    }

    /// Mean curvature, required to satisfy `|H| < 1`.
    pub fn curvature(&self, default: Option<f64>) -> Result<f64, CliError> {
        let h = match default {
            Some(d) => self.get("H", d)?,
            None => self.require("H")?,
        };
        if h.is_nan() || h.abs() >= 1.0 {
            return Err(CliError::Usage(format!("H = {h} must satisfy |H| < 1")));
        }
        Ok(h)
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(self.raw("out").unwrap_or("out")))
    }

    pub fn domain(&self, level: u32) -> Result<DomainSpec, CliError> {
        parse_domain(self.raw("domain").unwrap_or("cap:0.3"), level)
    }

    /// A comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str, default: &str) -> Result<Vec<T>, CliError> {
        let v = self.raw(key).unwrap_or(default);
        v.split(',')
            .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("invalid entry in {key}: '{s}'"))))
            .collect()
    }

    /// An inclusive range `a..b` or a single value.
    pub fn range(&self, key: &str, default: &str) -> Result<(u32, u32), CliError> {
        let v = self.raw(key).unwrap_or(default);
        let bad = || CliError::Usage(format!("invalid range for {key}: '{v}'"));
        let (a, b) = match v.split_once("..") {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let a = v.trim().parse().map_err(|_| bad())?;
                (a, a)
            }
        };
        if a > b {
            return Err(bad());
        }
        Ok((a, b))
    }
}

/// `cap:EPS` or `ball:X,Y,Z,R`.
pub fn parse_domain(s: &str, level: u32) -> Result<DomainSpec, CliError> {
    let bad = || CliError::Usage(format!("invalid domain '{s}' (expected cap:EPS or ball:X,Y,Z,R)"));
    let (kind, args) = s.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = args.split(',').map(|a| a.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let spec = match (kind, nums.as_slice()) {
        ("cap", [eps]) => DomainSpec::cap(*eps, level),
        ("ball", [x, y, z, r]) => DomainSpec::ball([*x, *y, *z], *r, level),
        _ => return Err(bad()),
    };
    spec.disk::<f64>().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}
