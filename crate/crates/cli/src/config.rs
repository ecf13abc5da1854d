//! Optional JSON config file: supplies defaults for flags the user omitted;
//! explicit flags always win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub format: Option<String>,
    pub task: Option<String>,
    pub axis: Option<String>,
    pub form: Option<String>,
    pub n_bins: Option<usize>,
    pub threshold: Option<f64>,
    pub alpha: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub max_samples_seen: Option<f64>,
    pub dataset_unique_samples: Option<f64>,
    pub max_repetition: Option<f64>,
    pub keep_warmup: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        match path {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::user(format!("cannot read config {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::user(format!("bad config {}: {e}", path.display())))
            }
        }
    }
}

/// Flag value if given, else config-file value, else the built-in default.
pub fn resolve<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`resolve`] but the setting is required from one of the two sources.
pub fn resolve_required<T: Clone>(
    flag: Option<T>,
    file: Option<T>,
    name: &str,
) -> Result<T, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::user(format!("--{name} is required (flag or config file)")))
}
