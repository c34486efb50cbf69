//! Parameter resolution: command-line flag, then JSON config file, then the
//! built-in default.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Values loaded from `--config`, with a record of which keys were consumed
/// and the resolved value of every parameter.
pub struct Resolver {
    file: Map<String, Value>,
    used: RefCell<BTreeSet<String>>,
    resolved: RefCell<Map<String, Value>>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config file {}", p.display()))?;
                match serde_json::from_str(&text)
                    .with_context(|| format!("config file {} is not valid JSON", p.display()))?
                {
                    Value::Object(m) => m,
                    _ => bail!("config file {} must hold a JSON object", p.display()),
                }
            }
        };
        Ok(Self {
            file,
            used: RefCell::default(),
            resolved: RefCell::default(),
        })
    }

    /// Resolves `key`: the flag wins over the file, the file over `default`.
    pub fn get<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: DeserializeOwned + Serialize,
    {
        self.used.borrow_mut().insert(key.to_string());
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(raw)) => serde_json::from_value(raw.clone())
                .with_context(|| format!("config key '{key}' has the wrong type: {raw}"))?,
            (None, None) => default,
        };
        self.resolved
            .borrow_mut()
            .insert(key.to_string(), serde_json::to_value(&value)?);
        Ok(value)
    }

    /// Rejects config keys the command never asked for (typos, wrong command).
    pub fn finish(self) -> Result<Map<String, Value>> {
        let used = self.used.into_inner();
        let unknown: Vec<&String> = self.file.keys().filter(|k| !used.contains(*k)).collect();
        if !unknown.is_empty() {
            bail!(
                "unknown config key(s) {unknown:?}; this command accepts {:?}",
                used
            );
        }
        Ok(self.resolved.into_inner())
    }
}
