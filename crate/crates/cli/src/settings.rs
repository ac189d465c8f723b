use std::path::Path;

use msbench_core::metadata::MetadataConfig;
use msbench_core::metrics::DEFAULT_TAU;
use msbench_core::spectra::{bin_count, DEFAULT_MAX_MZ, DEFAULT_RESOLUTION};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Optional run file given with `--config`. Flags override its values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub resolution: Option<f64>,
    pub max_mz: Option<f64>,
    pub tau: Option<f64>,
    pub threads: Option<usize>,
    pub metadata: Option<MetadataConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

/// Values after merging defaults, the config file and flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub resolution: f64,
    pub max_mz: f64,
    pub tau: f64,
    #[serde(skip)]
    pub threads: Option<usize>,
    pub metadata: MetadataConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 0,
            resolution: DEFAULT_RESOLUTION,
            max_mz: DEFAULT_MAX_MZ,
            tau: DEFAULT_TAU,
            threads: None,
            metadata: MetadataConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub resolution: Option<f64>,
    pub max_mz: Option<f64>,
    pub tau: Option<f64>,
    pub threads: Option<usize>,
}

impl Settings {
    pub fn resolve(file: RunConfig, flags: Overrides) -> Result<Settings> {
        let d = Settings::default();
        let s = Settings {
            seed: flags.seed.or(file.seed).unwrap_or(d.seed),
            resolution: flags.resolution.or(file.resolution).unwrap_or(d.resolution),
            max_mz: flags.max_mz.or(file.max_mz).unwrap_or(d.max_mz),
            tau: flags.tau.or(file.tau).unwrap_or(d.tau),
            threads: flags.threads.or(file.threads),
            metadata: file.metadata.unwrap_or(d.metadata),
        };
        bin_count(s.resolution, s.max_mz).map_err(CliError::usage)?;
        if !(s.tau.is_finite() && (0.0..1.0).contains(&s.tau)) {
            return Err(CliError::usage(format!("--tau must lie in [0, 1), got {}", s.tau)));
        }
        if s.threads == Some(0) {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        Ok(s)
    }

    pub fn n_bins(&self) -> usize {
        bin_count(self.resolution, self.max_mz).expect("validated in resolve")
    }

    /// Configuration echo: global settings plus the command's own parameters.
    pub fn echo(&self, command: &str, params: Value) -> Value {
        json!({
            "command": command,
            "settings": serde_json::to_value(self).expect("settings serialize"),
            "parameters": params,
        })
    }
}

/// SHA-256 of the compact JSON text of `v`. Object keys are sorted, so the
/// digest does not depend on construction order.
pub fn config_hash(v: &Value) -> String {
    hex(&Sha256::digest(v.to_string().as_bytes()))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::in_file(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
