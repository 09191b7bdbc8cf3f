//! File outputs: CSV/JSON artifacts and the run manifest with checksums.

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{QembedError, Result};
use crate::observables::{Curve, Histogram};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// 9 significant digits, locale-independent, byte-stable.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)
        .map_err(|e| QembedError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Tracks emitted files and their checksums for the manifest.
pub struct OutputSink {
    dir: PathBuf,
    format: OutputFormat,
    checksums: BTreeMap<String, String>,
}

impl OutputSink {
    pub fn new(dir: &Path, format: OutputFormat) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| QembedError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            format,
            checksums: BTreeMap::new(),
        })
    }

    fn emit(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.dir.join(name);
        write_bytes(&path, &bytes)?;
        self.checksums.insert(name.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| QembedError::Io(format!("JSON encoding failed: {e}")))?;
        text.push('\n');
        self.emit(&format!("{stem}.json"), text.into_bytes())
    }

    fn emit_xy(&mut self, stem: &str, header: &str, rows: &[(f64, f64)]) -> Result<()> {
        let mut text = String::with_capacity(rows.len() * 32);
        text.push_str(header);
        text.push('\n');
        for &(x, y) in rows {
            text.push_str(&sig9(x));
            text.push(',');
            text.push_str(&sig9(y));
            text.push('\n');
        }
        self.emit(&format!("{stem}.csv"), text.into_bytes())
    }

    pub fn histogram(&mut self, stem: &str, h: &Histogram, x_name: &str) -> Result<()> {
        match self.format {
            OutputFormat::Json => self.emit_json(stem, h),
            OutputFormat::Csv => {
                let rows: Vec<(f64, f64)> = h
                    .bin_centers()
                    .into_iter()
                    .zip(h.density.iter().cloned())
                    .collect();
                self.emit_xy(stem, &format!("{x_name},density"), &rows)
            }
        }
    }

    pub fn curve(&mut self, stem: &str, c: &Curve, header: &str) -> Result<()> {
        match self.format {
            OutputFormat::Json => self.emit_json(stem, c),
            OutputFormat::Csv => {
                let rows: Vec<(f64, f64)> =
                    c.x.iter().cloned().zip(c.y.iter().cloned()).collect();
                self.emit_xy(stem, header, &rows)
            }
        }
    }

    /// One q-table row per (kind, N, m, k); q printed to 3 decimals.
    pub fn qtable(&mut self, stem: &str, rows: &[QTableRow]) -> Result<()> {
        match self.format {
            OutputFormat::Json => self.emit_json(stem, &rows),
            OutputFormat::Csv => {
                let mut text = String::from("kind,N,m,k,q\n");
                for r in rows {
                    text.push_str(&format!("{},{},{},{},{:.3}\n", r.kind, r.n_sp, r.m, r.k, r.q));
                }
                self.emit(&format!("{stem}.csv"), text.into_bytes())
            }
        }
    }

    /// Written last so a manifest on disk implies the data files are
    /// complete. Returns the manifest with the checksum map filled in.
    pub fn manifest(&mut self, m: &RunManifest) -> Result<RunManifest> {
        let mut manifest = m.clone();
        manifest.files = self.checksums.clone();
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| QembedError::Io(format!("JSON encoding failed: {e}")))?;
        text.push('\n');
        write_bytes(&self.dir.join("manifest.json"), text.as_bytes())?;
        Ok(manifest)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QTableRow {
    pub kind: String,
    pub n_sp: u32,
    pub m: u32,
    pub k: u32,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ExperimentConfig,
    /// q_for of the configured system, full double precision.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<u64>,
    /// Survival runs: qualifying-state count per member.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qualifying_counts: Option<Vec<usize>>,
    pub wall_time_sec: f64,
    pub files: BTreeMap<String, String>,
}
