//! Output directory management: every file written through [`RunWriter`] is
//! hashed into `manifest.json`, which is rewritten after each completed
//! lambda so an interrupted run still documents what it finished.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::svg::{render_bifurcation, render_color_diagram, render_profile};
use super::tables::{bifurcation_csv, grid_csv, profile_csv};
use crate::continuation::{emit_bifurcation_data, SweepResult, SweepStep};
use crate::error::{Error, Result};
use crate::shooting::SolutionRecord;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const BIFURCATION_CSV: &str = "bifurcation.csv";
pub const BIFURCATION_SVG: &str = "bifurcation.svg";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory, '/'-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Complete,
    Incomplete,
}

/// What happened at one lambda.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEntry {
    pub lambda: f64,
    pub status: EntryStatus,
    pub solutions: usize,
    pub lower: bool,
    pub upper: bool,
    pub fallback_used: bool,
    /// Files written for this lambda.
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub lambdas: Vec<LambdaEntry>,
    pub files: Vec<FileEntry>,
    /// Set once the command finished; false in a manifest left by an
    /// interrupted run.
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_bif: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files into one output directory and keeps the manifest current.
#[derive(Debug)]
pub struct RunWriter {
    dir: PathBuf,
    manifest: RunManifest,
}

impl RunWriter {
    pub fn create(dir: impl Into<PathBuf>, command: &str, config: &RunConfig) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let w = RunWriter {
            dir,
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                config: config.clone(),
                lambdas: Vec::new(),
                files: Vec::new(),
                complete: false,
                lambda_bif: None,
            },
        };
        w.save()?;
        Ok(w)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// Writes `rel` under the output directory and records its hash,
    /// replacing any earlier entry for the same path.
    pub fn write_file(&mut self, rel: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        let entry = FileEntry {
            path: rel.to_string(),
            sha256: sha256_hex(contents),
            bytes: contents.len() as u64,
        };
        match self.manifest.files.iter_mut().find(|f| f.path == rel) {
            Some(f) => *f = entry,
            None => self.manifest.files.push(entry),
        }
        Ok(())
    }

    pub fn record_lambda(&mut self, entry: LambdaEntry) -> Result<()> {
        self.manifest.lambdas.push(entry);
        self.save()
    }

    pub fn set_lambda_bif(&mut self, lambda_bif: Option<f64>) {
        self.manifest.lambda_bif = lambda_bif;
    }

    /// Rewrites manifest.json (via a temporary file, so readers never see a
    /// half-written manifest).
    pub fn save(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| Error::Serde(e.to_string()))?;
        let tmp = self.dir.join(format!("{MANIFEST_FILE}.tmp"));
        let dst = self.dir.join(MANIFEST_FILE);
        fs::write(&tmp, text + "\n").map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &dst).map_err(|e| Error::io(&dst, e))
    }

    pub fn finish(mut self) -> Result<RunManifest> {
        self.manifest.complete = true;
        self.manifest.lambdas.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        self.manifest.files.sort_by(|a, b| a.path.cmp(&b.path));
        self.save()?;
        Ok(self.manifest)
    }
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))
}

/// Paths whose file is missing or whose hash differs from the manifest.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let manifest = read_manifest(dir)?;
    Ok(manifest
        .files
        .iter()
        .filter(|f| match fs::read(dir.join(&f.path)) {
            Ok(bytes) => sha256_hex(&bytes) != f.sha256,
            Err(_) => true,
        })
        .map(|f| f.path.clone())
        .collect())
}

/// Stable file-name fragment for a lambda value.
pub fn lambda_tag(lambda: f64) -> String {
    format!("lambda_{lambda:.4}")
}

/// What to write for each lambda of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EmitFlags {
    pub grids: bool,
    pub profiles: bool,
    pub bifurcation: bool,
}

impl EmitFlags {
    pub fn from_config(cfg: &RunConfig) -> Self {
        EmitFlags {
            grids: cfg.output.emit_grids,
            profiles: cfg.output.emit_profiles,
            bifurcation: cfg.output.emit_bifurcation,
        }
    }
}

/// Persists one sweep step: optional grids and profiles, the bifurcation
/// table so far, and the lambda's manifest entry. `so_far` must already
/// contain the step's records.
pub fn persist_step(
    writer: &mut RunWriter,
    step: &SweepStep,
    so_far: &[SolutionRecord],
    emit: EmitFlags,
) -> Result<()> {
    let tag = lambda_tag(step.lambda);
    let mut files = Vec::new();
    let mut write = |writer: &mut RunWriter, rel: String, body: String| -> Result<()> {
        writer.write_file(&rel, body.as_bytes())?;
        files.push(rel);
        Ok(())
    };
    let result = (|| -> Result<()> {
        if emit.grids {
            let roots: Vec<(f64, f64)> = step.records.iter().map(|r| (r.du0, r.dv0)).collect();
            for (k, s) in step.searches.iter().enumerate() {
                write(writer, format!("grids/{tag}_w{k}_coarse.csv"), grid_csv(&s.coarse)?)?;
                write(writer, format!("grids/{tag}_w{k}_dense.csv"), grid_csv(&s.dense)?)?;
                write(
                    writer,
                    format!("grids/{tag}_w{k}_dense.svg"),
                    render_color_diagram(&s.dense, &roots),
                )?;
            }
        }
        if emit.profiles {
            for d in &step.details {
                let name = d.record.branch.name();
                write(writer, format!("profiles/{tag}_{name}.csv"), profile_csv(&d.trajectory)?)?;
                write(writer, format!("profiles/{tag}_{name}.svg"), render_profile(&d.trajectory))?;
            }
        }
        write(writer, BIFURCATION_CSV.to_string(), bifurcation_csv(so_far)?)?;
        Ok(())
    })();
    let entry = LambdaEntry {
        lambda: step.lambda,
        status: if result.is_ok() {
            EntryStatus::Complete
        } else {
            EntryStatus::Incomplete
        },
        solutions: step.records.len(),
        lower: step.records.iter().any(|r| r.branch == crate::shooting::BranchLabel::Lower),
        upper: step.records.iter().any(|r| r.branch == crate::shooting::BranchLabel::Upper),
        fallback_used: step.fallback_used,
        files,
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    writer.record_lambda(entry)?;
    result
}

/// Final sweep outputs: bifurcation table and diagram plus a JSON summary.
pub fn persist_sweep_result(writer: &mut RunWriter, result: &SweepResult, emit: EmitFlags) -> Result<()> {
    let mut all: Vec<SolutionRecord> = Vec::new();
    all.extend(result.lower.records.iter().copied());
    all.extend(result.upper.records.iter().copied());
    all.extend(result.unlabeled.iter().copied());
    writer.write_file(BIFURCATION_CSV, bifurcation_csv(&all)?.as_bytes())?;
    if emit.bifurcation {
        let pts = emit_bifurcation_data(&[&result.lower, &result.upper]);
        writer.write_file(BIFURCATION_SVG, render_bifurcation(&pts, result.lambda_bif()).as_bytes())?;
    }
    let summary = serde_json::to_string_pretty(result).map_err(|e| Error::Serde(e.to_string()))?;
    writer.write_file("sweep.json", (summary + "\n").as_bytes())?;
    writer.set_lambda_bif(result.lambda_bif());
    writer.save()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_tracks_hashes_and_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = RunWriter::create(dir.path(), "test", &RunConfig::default()).unwrap();
        w.write_file("a.txt", b"hello").unwrap();
        w.write_file("sub/b.txt", b"world").unwrap();
        w.write_file("a.txt", b"hello again").unwrap();
        let m = w.finish().unwrap();
        assert!(m.complete);
        assert_eq!(m.files.len(), 2);
        assert_eq!(m.files[0].sha256, sha256_hex(b"hello again"));
        assert!(verify_manifest(dir.path()).unwrap().is_empty());
        fs::write(dir.path().join("sub/b.txt"), b"tampered").unwrap();
        assert_eq!(verify_manifest(dir.path()).unwrap(), vec!["sub/b.txt".to_string()]);
    }

    #[test]
    fn unfinished_run_leaves_an_incomplete_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = RunWriter::create(dir.path(), "trace", &RunConfig::default()).unwrap();
        w.record_lambda(LambdaEntry {
            lambda: 1.0,
            status: EntryStatus::Complete,
            solutions: 2,
            lower: true,
            upper: true,
            fallback_used: false,
            files: vec![],
            error: None,
        })
        .unwrap();
        drop(w);
        let m = read_manifest(dir.path()).unwrap();
        assert!(!m.complete);
        assert_eq!(m.lambdas.len(), 1);
        assert_eq!(m.config, RunConfig::default());
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
