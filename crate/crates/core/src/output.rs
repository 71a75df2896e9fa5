//! Output directories, CSV/JSON writers and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::SweepResult;

pub const MANIFEST: &str = "manifest.json";

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A directory that receives one run's files.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    /// Creates `root` if needed. An existing manifest means a previous run
    /// lives here; that is refused unless `force` is set.
    pub fn prepare(root: &Path, force: bool) -> Result<Self> {
        if root.join(MANIFEST).exists() && !force {
            return Err(Error::RefusesOverwrite(root.to_path_buf()));
        }
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    /// CSV with a leading `# master_seed=...` comment line.
    pub fn write_csv(&mut self, name: &str, master_seed: u64, body: &str) -> Result<()> {
        self.write_text(name, &format!("# master_seed={master_seed}\n{body}"))
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Writes the manifest last so its file list is complete.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<PathBuf> {
        manifest.finished_unix = unix_now();
        manifest.files = self.written.clone();
        manifest.files.push(MANIFEST.to_string());
        self.write_json(MANIFEST, &manifest)?;
        Ok(self.root)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HostInfo {
    pub hostname: String,
    pub os: &'static str,
    pub arch: &'static str,
    pub available_threads: usize,
    pub parallel_build: bool,
}

impl HostInfo {
    pub fn current() -> Self {
        let hostname = std::env::var("HOSTNAME")
            .ok()
            .or_else(|| std::fs::read_to_string("/etc/hostname").ok())
            .map(|s| s.trim().to_string())
            .unwrap_or_default();
        HostInfo {
            hostname,
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            available_threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            parallel_build: crate::par::Execution::parallel_available(),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub threads: Option<usize>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub host: HostInfo,
    /// Labelled wall-clock durations in seconds.
    pub wall_times: Vec<(String, f64)>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, master_seed: u64, threads: Option<usize>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            master_seed,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            threads,
            started_unix: unix_now(),
            finished_unix: f64::NAN,
            host: HostInfo::current(),
            wall_times: Vec::new(),
            files: Vec::new(),
        }
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// `sweep_result.csv`, `rates.json` and `manifest.json`.
pub fn emit_sweep(result: &SweepResult, mut dir: OutputDir, mut manifest: RunManifest) -> Result<PathBuf> {
    dir.write_csv("sweep_result.csv", result.config.master_seed, &result.csv())?;
    #[derive(Serialize)]
    struct Rates<'a> {
        master_seed: u64,
        #[serde(flatten)]
        rates: &'a crate::experiments::SweepRates,
    }
    dir.write_json(
        "rates.json",
        &Rates {
            master_seed: result.config.master_seed,
            rates: &result.rates,
        },
    )?;
    for row in &result.rows {
        manifest.wall_times.push((format!("N={}", row.n), row.wall_time));
    }
    dir.finish(manifest)
}

/// Builds a CSV body from a header and rows of already formatted cells.
pub fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
