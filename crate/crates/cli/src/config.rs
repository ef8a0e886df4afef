//! Run configuration: JSON config files plus flag overrides.

use std::path::{Path, PathBuf};

use gwcell::model::{ModelParams, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TreeFileFormat {
    Json,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub var: String,
    pub values: Vec<f64>,
}

/// Everything a run can specify. A JSON config file deserializes into this
/// shape; command-line flags overwrite individual fields afterwards.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    /// Full initial age histogram for `simulate` (length n).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_counts: Option<Vec<u64>>,
    /// Shorthand initial population: `cells` copies of one age.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_age: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_format: Option<TreeFileFormat>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_slice(&raw)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }

    /// Folds the model flags into the config. With no config model the four
    /// family parameters must all be present; a general model from a config
    /// file accepts only a `--p` override.
    pub fn apply_model_flags(
        &mut self,
        n: Option<usize>,
        m: Option<usize>,
        p: Option<f64>,
        alpha: Option<f64>,
    ) -> Result<(), CliError> {
        match &mut self.model {
            None => {
                if n.is_none() && m.is_none() && p.is_none() && alpha.is_none() {
                    return Ok(());
                }
                match (n, m, p, alpha) {
                    (Some(n), Some(m), Some(p), Some(alpha)) => {
                        self.model = Some(ModelSpec::malpha(n, m, p, alpha));
                        Ok(())
                    }
                    _ => Err(CliError::config(
                        "the model needs all of --n --m --p --alpha (or a --config file)"
                            .to_string(),
                    )),
                }
            }
            Some(spec) => spec.override_with(n, m, p, alpha).map_err(CliError::config),
        }
    }

    /// The validated model, required by every command.
    pub fn resolve_model(&self) -> Result<ModelParams, CliError> {
        let spec = self
            .model
            .clone()
            .ok_or_else(|| CliError::config("no model given: use --n --m --p --alpha or --config".to_string()))?;
        ModelParams::try_from(spec).map_err(CliError::from)
    }

    pub fn format_or(&self, default: OutputFormat) -> OutputFormat {
        self.format.unwrap_or(default)
    }
}

/// Overwrites `slot` when the flag carries a value.
pub fn override_opt<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}
