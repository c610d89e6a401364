//! Output directory bookkeeping and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mkv_core::measure::io::fmt_f64;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    bytes: usize,
    sha256: String,
}

pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
    started: Instant,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Artifacts {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> CliResult<()> {
        self.write(name, table.text.as_bytes())
    }

    /// Writes `manifest.json`; returns the list of data files.
    pub fn finish(mut self, command: &str, config: &RunConfig, threads: usize) -> CliResult<Vec<String>> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let config_bytes = serde_json::to_vec(config)?;
        let manifest = json!({
            "tool": "mkv",
            "version": env!("CARGO_PKG_VERSION"),
            "core_version": mkv_core::VERSION,
            "command": command,
            "threads": threads,
            "config": config,
            "config_sha256": sha256_hex(&config_bytes),
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "files": self.files,
        });
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let path = self.dir.join(MANIFEST);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(self.files.into_iter().map(|f| f.path).collect())
    }
}

/// CSV text with a header row and 17 significant digits per float.
pub struct Table {
    text: String,
    width: usize,
}

pub enum Cell<'a> {
    F(f64),
    U(u64),
    S(&'a str),
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            text,
            width: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        debug_assert_eq!(cells.len(), self.width);
        let parts: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::F(x) => fmt_f64(*x),
                Cell::U(n) => n.to_string(),
                Cell::S(s) => s.to_string(),
            })
            .collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }
}
