use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance of one run, written next to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: String,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects header lines and data rows, then writes them in one go so that a
/// failed run never leaves a partial CSV behind.
pub struct Report {
    manifest: RunManifest,
    header: Vec<String>,
    body: String,
}

impl Report {
    pub fn new(config_digest: String, seed: Option<u64>) -> Self {
        let command_line = std::env::args().collect::<Vec<_>>().join(" ");
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Report {
            manifest: RunManifest {
                command_line,
                config_digest,
                seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp: format!("unix:{secs}"),
                outputs: Vec::new(),
            },
            header: Vec::new(),
            body: String::new(),
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.header.push(line.into());
    }

    pub fn row(&mut self, line: impl AsRef<str>) {
        self.body.push_str(line.as_ref());
        self.body.push('\n');
    }

    pub fn rows(&mut self, text: &str) {
        self.body.push_str(text);
    }

    fn render(&self, manifest_ref: &str) -> String {
        let mut s = String::new();
        s.push_str(&format!("# ltwist {}\n", self.manifest.tool_version));
        s.push_str(&format!("# command: {}\n", self.manifest.command_line));
        s.push_str(&format!("# config_sha256: {}\n", self.manifest.config_digest));
        if let Some(seed) = self.manifest.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        s.push_str(&format!("# manifest: {manifest_ref}\n"));
        for line in &self.header {
            s.push_str(&format!("# {line}\n"));
        }
        s.push_str(&self.body);
        s
    }

    /// Writes to `out` (plus `<out>.manifest.json`) or to stdout.
    pub fn finish(mut self, out: Option<&Path>, extra: &[(PathBuf, String)]) -> Result<()> {
        match out {
            None => {
                let text = self.render("stdout");
                std::io::stdout().write_all(text.as_bytes())?;
            }
            Some(path) => {
                let manifest_path = manifest_path(path);
                self.manifest.outputs.push(path.display().to_string());
                self.manifest.outputs.extend(extra.iter().map(|(p, _)| p.display().to_string()));
                let name = manifest_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let text = self.render(&name);
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                for (p, body) in extra {
                    fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
                }
                let json = serde_json::to_string_pretty(&self.manifest)?;
                fs::write(&manifest_path, json + "\n").with_context(|| format!("writing {}", manifest_path.display()))?;
            }
        }
        Ok(())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Nine significant digits in scientific notation; `nan` and `inf` spelled out.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.8e}")
    }
}
