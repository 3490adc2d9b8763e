//! Effective configuration: the config file with command-line overrides.

use std::sync::Arc;

use anyhow::Context;
use fsukit::batch::Scorer;
use fsukit::config::ToolkitConfig;
use fsukit::schema::Schema;

use crate::args::GlobalOpts;

pub struct Settings {
    pub config: ToolkitConfig,
    pub schema: Arc<Schema>,
}

impl Settings {
    pub fn load(opts: &GlobalOpts) -> anyhow::Result<Self> {
        let mut config = match &opts.config {
            Some(path) => ToolkitConfig::load(path)?,
            None => ToolkitConfig::default(),
        };
        if let Some(p) = opts.preset {
            config.eval.preset = p;
        }
        if let Some(s) = opts.sigma1 {
            config.reward.sigma1 = s;
        }
        if let Some(s) = opts.sigma2 {
            config.reward.sigma2 = s;
        }
        if let Some(s) = opts.sigma3 {
            config.reward.sigma3 = s;
        }
        config.validate().context("invalid configuration")?;
        let schema = config.load_schema()?;
        Ok(Self { config, schema })
    }

    pub fn scorer(&self) -> Scorer {
        Scorer::new(self.config.reward, self.config.parse, self.schema.clone())
    }
}
