//! Run manifests: tool version, resolved settings, timestamps, inputs and
//! outputs of a command.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use mlrfit::em::lad::{IRLS_DELTA_SCALE, IRLS_MAX_ITERATIONS, IRLS_TOLERANCE};
use mlrfit::RIDGE_SCALE;

use crate::error::CliResult;
use crate::format::{num, write_file, KeyValues};

pub const MANIFEST_FILE: &str = "manifest.txt";

pub fn unix_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Manifest path next to a single output file: `<file>.manifest.txt`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.txt");
    output.with_file_name(name)
}

#[derive(Debug, Clone)]
pub struct Manifest {
    command: String,
    started: u64,
    settings: KeyValues,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            started: unix_seconds(),
            settings: KeyValues::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn setting(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.settings.push(key, value);
        self
    }

    /// Records the numerical constants fixed inside the solvers.
    pub fn solver_constants(&mut self) -> &mut Self {
        self.settings
            .push("ridge_scale", num(RIDGE_SCALE))
            .push("irls_delta_scale", num(IRLS_DELTA_SCALE))
            .push("irls_max_iterations", IRLS_MAX_ITERATIONS)
            .push("irls_tolerance", num(IRLS_TOLERANCE));
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    pub fn render(&self) -> String {
        let mut kv = KeyValues::new();
        kv.push("tool", env!("CARGO_PKG_NAME"))
            .push("version", env!("CARGO_PKG_VERSION"))
            .push("command", &self.command)
            .push("started_unix", self.started)
            .push("finished_unix", unix_seconds());
        kv.extend("config.", &self.settings);
        for (i, p) in self.inputs.iter().enumerate() {
            kv.push(format!("input.{i}"), p.display());
        }
        for (i, p) in self.outputs.iter().enumerate() {
            kv.push(format!("output.{i}"), p.display());
        }
        kv.render("mlrfit manifest")
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_file(path, &self.render())
    }
}
