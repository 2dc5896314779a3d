//! Ordered, single-writer artifact emission with a digest manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::RunError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub library_version: String,
    pub workers: usize,
    pub duration_secs: f64,
    pub outputs: Vec<OutputFile>,
    /// Headline numbers of the run.
    pub results: serde_json::Value,
}

pub const SUMMARY_FILE: &str = "summary.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects artifacts in emission order.
pub struct Emitter {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Emitter {
    pub fn new(dir: &Path) -> Result<Self, RunError> {
        std::fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        std::fs::write(&path, &bytes).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(OutputFile {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let s = ergostab_core::io::to_json_string(value)?;
        self.write(name, s.into_bytes())
    }

    /// Renders a CSV through `emit` into memory and writes it.
    pub fn csv(
        &mut self,
        name: &str,
        emit: impl FnOnce(&mut Vec<u8>) -> ergostab_core::Result<()>,
    ) -> Result<(), RunError> {
        let mut buf = Vec::new();
        emit(&mut buf)?;
        self.write(name, buf)
    }

    /// Writes a CSV from a header and rows of pre-formatted fields.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), RunError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        let io = |e: csv::Error| RunError::Io(format!("{name}: {e}"));
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Io(format!("{name}: {e}")))?;
        self.write(name, bytes)
    }

    pub fn finish(self, mut summary: RunSummary) -> Result<RunSummary, RunError> {
        summary.outputs = self.files;
        let s = ergostab_core::io::to_json_string(&summary)?;
        let path = self.dir.join(SUMMARY_FILE);
        std::fs::write(&path, s).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        Ok(summary)
    }
}

/// Recomputes the digest of every manifest entry; returns mismatching paths.
pub fn verify_manifest(dir: &Path, files: &[OutputFile]) -> Result<Vec<String>, RunError> {
    let mut bad = Vec::new();
    for f in files {
        let bytes = std::fs::read(dir.join(&f.path))?;
        if sha256_hex(&bytes) != f.sha256 || bytes.len() != f.bytes {
            bad.push(f.path.clone());
        }
    }
    Ok(bad)
}

/// Shortest round-trip decimal rendering.
pub fn num(x: f64) -> String {
    x.to_string()
}
