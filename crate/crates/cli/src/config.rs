use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Keys of a config file that apply to every command.
pub const GLOBAL_KEYS: [&str; 3] = ["seed", "out", "format"];

/// A parsed `--config` file: global keys plus per-command sections.
#[derive(Debug, Default)]
pub struct ConfigFile {
    root: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let value: Value =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        match value {
            Value::Object(root) => Ok(Self { root }),
            _ => bail!("config {} must be a JSON object", path.display()),
        }
    }

    pub fn global(&self, key: &str) -> Option<&Value> {
        self.root.get(key)
    }

    /// Parameters for `command`: its own section if present, otherwise every
    /// non-global top-level key.
    pub fn section(&self, command: &str) -> Map<String, Value> {
        if let Some(Value::Object(section)) = self.root.get(command) {
            return section.clone();
        }
        self.root
            .iter()
            .filter(|(k, v)| !GLOBAL_KEYS.contains(&k.as_str()) && !v.is_object())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// Overlays the flags that were given on the command line onto the config
/// section. Unset flags serialize to nothing, so the file value survives.
pub fn merge<T: Serialize + DeserializeOwned>(command: &str, flags: &T, config: &ConfigFile) -> Result<T> {
    let mut merged = config.section(command);
    match serde_json::to_value(flags)? {
        Value::Object(f) => merged.extend(f),
        _ => unreachable!("argument structs serialize to objects"),
    }
    serde_json::from_value(Value::Object(merged)).with_context(|| format!("invalid parameters for {command}"))
}
