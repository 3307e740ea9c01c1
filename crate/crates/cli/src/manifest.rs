//! Run manifests and checksummed output files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use nlhelm::farfield::{flux_balance, FarFieldReport};
use nlhelm::fields::io::{sha256_hex, write_field};
use nlhelm::fields::Field;
use nlhelm::solver::IterationReport;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::CliResult;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub nlhelm: String,
    pub manifest: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldSummary {
    pub g_l2: f64,
    /// `None` when the remainder is at rounding level (exactly outgoing data).
    pub eps_prime: Option<f64>,
    pub fit_window: (f64, f64),
    pub residual_monotone: bool,
    pub flux_in: f64,
    pub flux_out: f64,
    pub flux_balance: f64,
}

impl FarFieldSummary {
    pub fn new(rep: &FarFieldReport, f: &nlhelm::angular::AngularSpectrum) -> CliResult<Self> {
        Ok(Self {
            g_l2: rep.g.l2_norm(),
            eps_prime: rep.eps_prime.is_finite().then_some(rep.eps_prime),
            fit_window: rep.fit_window,
            residual_monotone: rep.residual_monotone,
            flux_in: rep.flux_in,
            flux_out: rep.flux_out,
            flux_balance: flux_balance(f, &rep.g)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub versions: Versions,
    pub serial: bool,
    /// Wall-clock seconds per stage; the only field that varies between identical serial runs.
    pub timings: BTreeMap<String, f64>,
    /// Largest resolvent tail bound beyond `r_max`.
    pub tail_bound: Option<f64>,
    pub iteration: Option<IterationReport>,
    pub farfield: Option<FarFieldSummary>,
    /// Command-specific results.
    pub summary: Value,
    /// SHA-256 of every emitted file, by name.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, serial: bool) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            versions: Versions {
                nlhelm: env!("CARGO_PKG_VERSION").to_string(),
                manifest: MANIFEST_VERSION,
            },
            serial,
            timings: BTreeMap::new(),
            tail_bound: None,
            iteration: None,
            farfield: None,
            summary: Value::Null,
            files: BTreeMap::new(),
        }
    }
}

/// Writes files into the output directory and records their checksums.
pub struct Emitter {
    dir: PathBuf,
    config: RunConfig,
    pub manifest: RunManifest,
}

impl Emitter {
    pub fn new(command: &str, config: &RunConfig, serial: bool) -> CliResult<Self> {
        let dir = config.outputs.directory.clone();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            config: config.clone(),
            manifest: RunManifest::new(command, config, serial),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.manifest
            .timings
            .insert(stage.to_string(), start.elapsed().as_secs_f64());
        out
    }

    /// Writes a CSV produced by `body` if CSV output is enabled.
    pub fn csv(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut Vec<u8>) -> CliResult<()>,
    ) -> CliResult<()> {
        if !self.config.outputs.wants(Format::Csv) {
            return Ok(());
        }
        let mut buf = Vec::new();
        body(&mut buf)?;
        self.raw(name, &buf)
    }

    pub fn field(&mut self, name: &str, field: &Field) -> CliResult<()> {
        if !self.config.outputs.wants(Format::Field) {
            return Ok(());
        }
        let digest = write_field(&self.dir.join(name), field)?;
        self.manifest.files.insert(name.to_string(), digest);
        Ok(())
    }

    fn raw(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::File::create(&path)?.write_all(bytes)?;
        self.manifest
            .files
            .insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(self) -> CliResult<RunManifest> {
        let text = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(self.dir.join(MANIFEST_NAME), text + "\n")?;
        Ok(self.manifest)
    }
}
