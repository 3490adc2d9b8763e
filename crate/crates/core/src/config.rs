//! Toolkit configuration file (TOML). Every section is optional.
//!
//! ```toml
//! schema = "my-schema.toml"   # defaults to the built-in schema
//!
//! [reward]
//! sigma1 = 0.5
//! sigma2 = 5.0
//! sigma3 = 0.5
//!
//! [eval]
//! preset = "supp"             # or "strict"
//! eps1 = 0.8
//!
//! [parse]
//! lenient_format = false
//!
//! [service]
//! max_batch = 1024
//!
//! [pipeline.harvest]
//! max_in_flight = 8
//!
//! [model]
//! url = "http://localhost:8000/v1/chat/completions"
//! name = "sign-vlm"
//! timeout_secs = 60
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distill::PipelineConfig;
use crate::error::ToolkitConfigError;
use crate::eval::EvalConfig;
use crate::parser::ParseOptions;
use crate::reward::RewardConfig;
use crate::schema::Schema;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub max_batch: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { max_batch: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSettings {
    pub url: Option<String>,
    pub name: String,
    pub timeout_secs: u64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            url: None,
            name: "default".into(),
            timeout_secs: 60,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolkitConfig {
    /// Schema file, resolved relative to the config file.
    pub schema: Option<PathBuf>,
    pub reward: RewardConfig,
    pub eval: EvalConfig,
    pub parse: ParseOptions,
    pub service: ServiceConfig,
    pub pipeline: PipelineConfig,
    pub model: ModelSettings,
}

impl ToolkitConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ToolkitConfigError> {
        let mut cfg: ToolkitConfig = toml::from_str(text).map_err(|source| ToolkitConfigError::Toml {
            path: origin.to_path_buf(),
            source,
        })?;
        if let (Some(schema), Some(dir)) = (&cfg.schema, origin.parent()) {
            if schema.is_relative() {
                cfg.schema = Some(dir.join(schema));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ToolkitConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ToolkitConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn validate(&self) -> Result<(), ToolkitConfigError> {
        self.reward.validate()?;
        self.eval.validate()?;
        Ok(())
    }

    pub fn load_schema(&self) -> Result<Arc<Schema>, ToolkitConfigError> {
        Ok(Arc::new(match &self.schema {
            Some(path) => Schema::from_path(path)?,
            None => Schema::builtin().clone(),
        }))
    }
}
