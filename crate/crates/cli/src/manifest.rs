use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::Failure;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Identity of one run: tool version, command, resolved config and
/// command arguments. `--workers` and the output directory are left out.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub args: Value,
    pub manifest_hash: String,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig, args: Value) -> Self {
        let body = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config,
            "args": args,
        });
        let hash = hex::encode(Sha256::digest(body.to_string().as_bytes()));
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            args,
            manifest_hash: hash,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), Failure> {
        create_dir(dir)?;
        write_file(&dir.join(MANIFEST_FILE), &pretty(self)?)
    }

    /// Writes `payload` as JSON with a top-level `manifest_hash` key. Arrays
    /// are wrapped under `items`.
    pub fn write_json<T: Serialize>(&self, path: &Path, payload: &T) -> Result<(), Failure> {
        let v = serde_json::to_value(payload).map_err(Failure::data)?;
        let mut obj = match v {
            Value::Object(m) => m,
            other => {
                let mut m = serde_json::Map::new();
                m.insert("items".into(), other);
                m
            }
        };
        obj.insert("manifest_hash".into(), Value::String(self.manifest_hash.clone()));
        write_file(path, &pretty(&obj)?)
    }

    /// Writes CSV text behind a `# manifest_hash: ...` comment line.
    pub fn write_csv(&self, path: &Path, body: &str) -> Result<(), Failure> {
        write_file(path, &format!("# manifest_hash: {}\n{body}", self.manifest_hash))
    }
}

fn pretty<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Failure::data)?;
    s.push('\n');
    Ok(s)
}

pub fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))
}

pub fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}
