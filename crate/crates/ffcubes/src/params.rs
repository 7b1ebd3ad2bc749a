//! Resolved parameters: command-line values over `key=value` config files over defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;
use std::sync::Mutex;

use ffcubes_core::{FieldCtx, PolyRing};

use crate::error::RunError;

/// Keys that only affect scheduling or file locations, never values.
pub const UNRECORDED: &[&str] = &["threads", "config", "out", "manifest"];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, RunError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(RunError::Usage(format!(
                "config line {}: expected key=value, got '{raw}'",
                i + 1
            )));
        };
        let k = k.trim().trim_start_matches("--").to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(RunError::Usage(format!(
                "config line {}: duplicate key '{k}'",
                i + 1
            )));
        }
    }
    Ok(out)
}

#[derive(Debug)]
pub struct Params {
    values: BTreeMap<String, String>,
    used: Mutex<BTreeMap<String, String>>,
}

impl Params {
    /// Merges file values with command-line values (which win) and rejects unknown keys.
    pub fn new(
        file: BTreeMap<String, String>,
        cli: BTreeMap<String, String>,
        known: &BTreeSet<String>,
    ) -> Result<Params, RunError> {
        let mut values = file;
        values.extend(cli);
        if let Some(bad) = values.keys().find(|k| !known.contains(*k)) {
            return Err(RunError::Usage(format!(
                "unknown parameter '{bad}' for this subcommand"
            )));
        }
        Ok(Params {
            values,
            used: Mutex::new(BTreeMap::new()),
        })
    }

    fn record(&self, key: &str, value: &str) {
        if !UNRECORDED.contains(&key) {
            self.used
                .lock()
                .expect("params lock")
                .insert(key.to_string(), value.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        let v = self.raw(key).unwrap_or(default).to_string();
        self.record(key, &v);
        v
    }

    pub fn opt_str(&self, key: &str) -> Option<String> {
        let v = self.raw(key).map(str::to_string);
        if let Some(v) = &v {
            self.record(key, v);
        }
        v
    }

    pub fn get<T: FromStr + ToString>(&self, key: &str, default: T) -> Result<T, RunError> {
        match self.raw(key) {
            Some(v) => {
                let parsed = v
                    .parse()
                    .map_err(|_| RunError::Usage(format!("bad value '{v}' for '{key}'")))?;
                self.record(key, v);
                Ok(parsed)
            }
            None => {
                self.record(key, &default.to_string());
                Ok(default)
            }
        }
    }

    pub fn opt<T: FromStr + ToString>(&self, key: &str) -> Result<Option<T>, RunError> {
        match self.raw(key) {
            Some(v) => {
                let parsed = v
                    .parse()
                    .map_err(|_| RunError::Usage(format!("bad value '{v}' for '{key}'")))?;
                self.record(key, v);
                Ok(Some(parsed))
            }
            None => Ok(None),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, RunError> {
        self.get(key, false)
    }

    /// The field; a bare integer means `q=<int>`.
    pub fn ring(&self, default: &str) -> Result<PolyRing, RunError> {
        let spec = self.raw("field").unwrap_or(default).to_string();
        let full = if spec.chars().all(|c| c.is_ascii_digit()) {
            format!("q={spec}")
        } else {
            spec
        };
        let ctx = FieldCtx::parse_spec(&full)?;
        self.record("field", &ctx.spec());
        Ok(PolyRing::new(ctx))
    }

    /// Every value read so far, including defaults.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.used.lock().expect("params lock").clone()
    }
}
