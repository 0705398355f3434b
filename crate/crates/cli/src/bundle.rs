//! Output bundles. Files are written into a hidden staging directory next to
//! the target and only moved into place once the whole experiment succeeded,
//! so a failed run never leaves partial CSVs behind.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Settings};
use crate::error::CliError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

/// One named acceptance gate evaluated on the run's own outputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub gate: String,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, gate: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            gate: gate.into(),
            passed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub experiment: &'static str,
    pub config: &'a ExperimentConfig,
    pub resolved: &'a Settings,
    pub versions: Versions,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
    pub checks: &'a [Check],
}

#[derive(Debug, Serialize)]
pub struct Versions {
    #[serde(rename = "rmt-entangle")]
    pub cli: &'static str,
    #[serde(rename = "rmt-entangle-core")]
    pub core: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            cli: env!("CARGO_PKG_VERSION"),
            core: rmt_entangle::VERSION,
        }
    }
}

pub struct Bundle {
    target: PathBuf,
    staging: PathBuf,
    files: Vec<String>,
    pub checks: Vec<Check>,
    finished: bool,
}

impl Bundle {
    pub fn create(target: &Path) -> Result<Self, CliError> {
        let name = target
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir(&staging)?;
        Ok(Self {
            target: target.to_path_buf(),
            staging,
            files: Vec::new(),
            checks: Vec::new(),
            finished: false,
        })
    }

    /// Writes `name` into the staging area through `body`.
    pub fn write<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let mut w = BufWriter::new(File::create(self.staging.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn failed_checks(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect()
    }

    /// Checksums the staged files, writes the manifest and moves everything
    /// into the target directory.
    pub fn finish(
        mut self,
        settings: &Settings,
        config: &ExperimentConfig,
        threads: usize,
        elapsed: Duration,
    ) -> Result<PathBuf, CliError> {
        let mut names = self.files.clone();
        names.sort();
        let mut files = Vec::with_capacity(names.len());
        for name in &names {
            let bytes = fs::read(self.staging.join(name))?;
            files.push(FileEntry {
                name: name.clone(),
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        let manifest = Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            experiment: settings.experiment.name(),
            config,
            resolved: settings,
            versions: Versions::default(),
            threads,
            wall_clock_seconds: elapsed.as_secs_f64(),
            files,
            checks: &self.checks,
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        fs::write(self.staging.join(MANIFEST_NAME), json + "\n")?;
        names.push(MANIFEST_NAME.to_string());

        if self.target.exists() {
            for name in &names {
                fs::rename(self.staging.join(name), self.target.join(name))?;
            }
            fs::remove_dir(&self.staging)?;
        } else {
            fs::rename(&self.staging, &self.target)?;
        }
        self.finished = true;
        Ok(self.target.clone())
    }
}

impl Drop for Bundle {
    fn drop(&mut self) {
        if !self.finished {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
