use crate::config::RunConfig;
use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub value: String,
    pub tolerance: String,
}

/// Run-dependent fields; everything outside this block is reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: u64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliManifest {
    pub command: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub table_keys: Vec<String>,
    pub files: Vec<String>,
    pub checks: Vec<CheckOutcome>,
    pub timing: Timing,
}

impl CliManifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Collects outputs of one command and writes them with their manifest.
pub struct Session {
    command: String,
    config: RunConfig,
    pub dir: std::path::PathBuf,
    table_keys: Vec<String>,
    files: Vec<String>,
    checks: Vec<CheckOutcome>,
    start: Instant,
    started_unix: u64,
}

impl Session {
    pub fn new(command: &str, config: &RunConfig) -> Result<Self, CliError> {
        let dir = config.output.join(&config.experiment).join(command);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Session {
            command: command.to_string(),
            config: config.clone(),
            dir,
            table_keys: Vec::new(),
            files: Vec::new(),
            checks: Vec::new(),
            start: Instant::now(),
            started_unix,
        })
    }

    pub fn add_key(&mut self, key: String) {
        if !self.table_keys.contains(&key) {
            self.table_keys.push(key);
        }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, value: impl Into<String>, tolerance: impl Into<String>) {
        self.checks.push(CheckOutcome { name: name.into(), passed, value: value.into(), tolerance: tolerance.into() });
    }

    pub fn finish(self) -> Result<CliManifest, CliError> {
        let m = CliManifest {
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config,
            table_keys: self.table_keys,
            files: self.files,
            checks: self.checks,
            timing: Timing { started_unix: self.started_unix, wall_time_s: self.start.elapsed().as_secs_f64() },
        };
        let text = serde_json::to_string_pretty(&m).map_err(|e| CliError::Io(e.to_string()))?;
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(m)
    }
}

pub fn read_manifest(path: &Path) -> Result<CliManifest, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(e.to_string()))
}
