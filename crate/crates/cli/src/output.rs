use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use wwm_core::phasespace::io::{write_function_csv_to, GridSidecar};
use wwm_core::phasespace::PhaseFunction;
use wwm_core::Result;

/// Artifacts collected in memory and written together with the manifest,
/// so a failed run leaves nothing behind.
pub struct Output {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

#[derive(Serialize)]
struct Artifact<'a> {
    path: &'a str,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: serde_json::Value,
    artifacts: Vec<Artifact<'a>>,
}

pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl Output {
    pub fn new(dir: &Path) -> Self {
        Output { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.retain(|(n, _)| n != name);
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.add(name, s.into_bytes());
        Ok(())
    }

    /// CSV with a header line and one line per row.
    pub fn add_csv<I: IntoIterator<Item = String>>(&mut self, name: &str, header: &str, rows: I) {
        let mut s = String::from(header);
        s.push('\n');
        for r in rows {
            s.push_str(&r);
            s.push('\n');
        }
        self.add(name, s.into_bytes());
    }

    /// A phase function as `<stem>.csv` plus its `<stem>.json` grid sidecar.
    pub fn add_function(&mut self, stem: &str, f: &PhaseFunction, hbar: f64) -> Result<()> {
        let mut buf = Vec::new();
        write_function_csv_to(f, &mut buf)?;
        self.add(&format!("{stem}.csv"), buf);
        let side = serde_json::to_string_pretty(&GridSidecar::new(f.grid(), hbar))?;
        self.add(&format!("{stem}.json"), side.into_bytes());
        Ok(())
    }

    pub fn finish(self, command: &str, config: serde_json::Value) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir)?;
        let mut written = Vec::new();
        let mut artifacts = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes)?;
            artifacts.push(Artifact { path: name, sha256: hex::encode(Sha256::digest(bytes)), bytes: bytes.len() });
            written.push(path);
        }
        let manifest = Manifest { tool: "wwm", version: env!("CARGO_PKG_VERSION"), command, config, artifacts };
        let mut s = serde_json::to_string_pretty(&manifest)?;
        s.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, s)?;
        written.push(path);
        Ok(written)
    }
}
