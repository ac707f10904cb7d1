//! Run manifests: a deterministic JSON snapshot of what a command is about
//! to do, written before any computation output. Every data file a command
//! emits references its manifest, so results stay traceable. Wall-clock
//! timing is reported on stderr only, keeping output files bit-identical
//! across reruns.

use std::path::{Path, PathBuf};

use serde::Serialize;

pub const MANIFEST_SCHEMA: &str = "rmm-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunManifest<A: Serialize> {
    pub schema: &'static str,
    pub version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub args: A,
    pub outputs: Vec<String>,
}

impl<A: Serialize> RunManifest<A> {
    pub fn new(command: &'static str, seed: u64, args: A, outputs: Vec<PathBuf>) -> Self {
        Self {
            schema: MANIFEST_SCHEMA,
            version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            args,
            outputs: outputs
                .into_iter()
                .map(|p| p.display().to_string())
                .collect(),
        }
    }

    /// Writes the manifest to `<stem>.manifest.json` and returns that path.
    pub fn write(&self, stem: &Path) -> rmm::Result<PathBuf> {
        let path = manifest_path(stem);
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| rmm::Error::internal(format!("manifest encode: {e}")))?;
        std::fs::write(&path, body)?;
        Ok(path)
    }
}

pub fn manifest_path(stem: &Path) -> PathBuf {
    suffixed(stem, ".manifest.json")
}

/// `<stem><suffix>`, keeping the stem's directory.
pub fn suffixed(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    stem.with_file_name(name)
}
