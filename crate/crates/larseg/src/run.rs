//! Per-invocation run records.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::io::{read_file, write_atomic, FormatError};
use crate::model_io::sha256_hex;

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

/// What a command did: its configuration, seeds, inputs, outputs with
/// checksums, and how long it took.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub config: Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<Artifact>,
    pub elapsed_ms: u128,
}

pub struct RunRecorder {
    manifest: RunManifest,
    started: Instant,
}

impl RunRecorder {
    pub fn start(command: &str, config: Value) -> Self {
        Self {
            manifest: RunManifest {
                command: command.to_owned(),
                version: env!("CARGO_PKG_VERSION"),
                config,
                seeds: Vec::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                elapsed_ms: 0,
            },
            started: Instant::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        if !self.manifest.seeds.contains(&seed) {
            self.manifest.seeds.push(seed);
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.manifest.inputs.push(path.to_path_buf());
    }

    /// Records an already written file with its checksum.
    pub fn output(&mut self, path: &Path) -> Result<(), FormatError> {
        let bytes = read_file(path)?;
        self.manifest.outputs.push(Artifact {
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes the manifest to `path`.
    pub fn finish(mut self, path: &Path) -> Result<RunManifest, FormatError> {
        self.manifest.elapsed_ms = self.started.elapsed().as_millis();
        let mut bytes = serde_json::to_vec_pretty(&self.manifest).expect("run manifest serializes");
        bytes.push(b'\n');
        write_atomic(path, &bytes)?;
        Ok(self.manifest)
    }
}
