//! TED activation and the mixed reward.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::parser::{parse_response_with, ParseOptions};
use crate::schema::{Schema, SignDecomposition};
use crate::ted::ted;
use crate::tree::build_tree;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            sigma1: 0.5,
            sigma2: 5.0,
            sigma3: 0.5,
        }
    }
}

impl RewardConfig {
    pub fn new(sigma1: f64, sigma2: f64, sigma3: f64) -> Result<Self, ConfigError> {
        let cfg = Self {
            sigma1,
            sigma2,
            sigma3,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Besides the per-parameter ranges, `sigma1 + sigma3 <= 1` keeps the
    /// activation nonnegative for every distance.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(ConfigError::Sigma2NotPositive(self.sigma2));
        }
        if !(self.sigma1 >= 0.0 && self.sigma1.is_finite()) {
            return Err(ConfigError::Sigma1Negative(self.sigma1));
        }
        if !(0.0..=1.0).contains(&self.sigma3) {
            return Err(ConfigError::Sigma3OutOfRange(self.sigma3));
        }
        if self.sigma1 + self.sigma3 > 1.0 + 1e-12 {
            return Err(ConfigError::RewardRangeNegative(self.sigma1 + self.sigma3));
        }
        Ok(())
    }

    /// Largest attainable TED reward, reached at distance 0.
    pub fn max_reward(&self) -> f64 {
        1.0 - self.sigma3
    }
}

/// `1 - (sigma1 * tanh(x / sigma2) + sigma3)`.
pub fn f_act(x: f64, cfg: &RewardConfig) -> f64 {
    1.0 - (cfg.sigma1 * (x / cfg.sigma2).tanh() + cfg.sigma3)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_cfsu: u8,
    pub r_fsu: u8,
    /// Present only when both format rewards are 1.
    pub ted: Option<u64>,
    pub r_ted: f64,
    pub r_mixed: f64,
}

impl RewardBreakdown {
    /// All-zero breakdown, used when scoring cannot proceed.
    pub fn zero() -> Self {
        Self {
            r_cfsu: 0,
            r_fsu: 0,
            ted: None,
            r_ted: 0.0,
            r_mixed: 0.0,
        }
    }
}

pub fn reward_mixed(raw: &str, gt: &SignDecomposition, cfg: &RewardConfig) -> RewardBreakdown {
    reward_mixed_with(raw, gt, cfg, ParseOptions::default(), Schema::builtin())
}

pub fn reward_mixed_with(
    raw: &str,
    gt: &SignDecomposition,
    cfg: &RewardConfig,
    opts: ParseOptions,
    schema: &Schema,
) -> RewardBreakdown {
    let response = parse_response_with(raw, opts, schema);
    let r_cfsu = u8::from(response.format_ok);
    let r_fsu = u8::from(response.parse_ok);
    match (&response.decomposition, response.format_ok) {
        (Some(pred), true) => {
            let distance = ted(&build_tree(pred), &build_tree(gt));
            let r_ted = f_act(distance as f64, cfg);
            RewardBreakdown {
                r_cfsu,
                r_fsu,
                ted: Some(distance),
                r_ted,
                r_mixed: r_ted,
            }
        }
        _ => RewardBreakdown {
            r_cfsu,
            r_fsu,
            ted: None,
            r_ted: 0.0,
            r_mixed: 0.0,
        },
    }
}
