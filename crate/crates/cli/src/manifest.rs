use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Record of how an output was produced, written next to it as
/// `<output>.manifest.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub quality: Option<u32>,
    pub seed: Option<u64>,
    pub flags: BTreeMap<String, Value>,
    pub version: String,
    /// Seconds since the UNIX epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            quality: None,
            seed: None,
            flags: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.to_owned());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.to_owned());
        self
    }

    pub fn quality(mut self, quality: u32) -> Self {
        self.quality = Some(quality);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn flag(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.flags.insert(name.to_owned(), value.into());
        self
    }

    /// Writes the manifest beside `artifact` and returns its path.
    pub fn write_beside(&self, artifact: &Path) -> CliResult<PathBuf> {
        let path = manifest_path(artifact);
        let json =
            serde_json::to_vec_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}
