use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `key=value` pairs addressed to one detector, e.g. `k=128,q=0.5`.
///
/// Every key must be read by the detector factory; [`DetectorParams::finish`]
/// rejects any key left unread.
#[derive(Debug, Default, Clone)]
pub struct DetectorParams {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl PartialEq for DetectorParams {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl DetectorParams {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for item in text.split([',', ';']).map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid("params", format!("`{item}` is not of the form key=value")))?;
            if values.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::invalid("params", format!("duplicate key `{}`", k.trim())));
            }
        }
        Ok(DetectorParams { values, used: RefCell::default() })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let v = self.values.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::InvalidParams {
                field: "params",
                reason: format!("`{key}={v}` has the wrong type"),
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Errors if any key was never read.
    pub fn finish(&self, detector: &str) -> Result<()> {
        let used = self.used.borrow();
        match self.values.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(Error::InvalidParams {
                field: "params",
                reason: format!("detector `{detector}` has no parameter `{k}`"),
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for DetectorParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for DetectorParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorParams::parse(s)
    }
}
