//! Automatic structure evaluation: weighted top-level score, per-FSU score,
//! sample verdicts and benchmark reports.

mod report;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::assignment::{linear_sum_assignment, CostMatrix};
use crate::error::ConfigError;
use crate::parser::{parse_response_with, ParseOptions};
use crate::schema::{BinaryGlobal, FsuEntry, FunctionType, Schema, SignDecomposition, FUNCTION_TYPE_KEY};

pub use report::{evaluate_benchmark, evaluate_benchmark_with, BenchmarkSample, CategoryStats, EvalReport, SampleResult};

/// Weight key shared by all per-group count keys.
pub const COUNT_WEIGHT_KEY: &str = "Count";

/// Slack for comparing accumulated floating sums against thresholds.
const SCORE_EPS: f64 = 1e-12;

/// Normalized Levenshtein similarity over characters; 1.0 for two empty
/// strings.
pub fn string_similarity(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(a, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Similarity {
    NormalizedLevenshtein,
}

/// Which open-set threshold is in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Supp,
    Strict,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "supp" => Ok(Preset::Supp),
            "strict" => Ok(Preset::Strict),
            other => Err(format!("unknown preset `{other}` (expected supp or strict)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub weights: BTreeMap<String, f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub open_sim_threshold: f64,
    pub strict_open_sim_threshold: f64,
    pub similarity: Similarity,
    pub preset: Preset,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(FUNCTION_TYPE_KEY.to_string(), 0.30);
        weights.insert(COUNT_WEIGHT_KEY.to_string(), 0.30);
        weights.insert(BinaryGlobal::TrafficSign.key().to_string(), 0.10);
        for b in [
            BinaryGlobal::ElectronicSign,
            BinaryGlobal::Obstruction,
            BinaryGlobal::Truncation,
            BinaryGlobal::Blur,
        ] {
            weights.insert(b.key().to_string(), 0.075);
        }
        Self {
            weights,
            eps1: 0.8,
            eps2: 0.5,
            open_sim_threshold: 0.5,
            strict_open_sim_threshold: 0.8,
            similarity: Similarity::NormalizedLevenshtein,
            preset: Preset::Supp,
        }
    }
}

impl EvalConfig {
    pub fn with_preset(preset: Preset) -> Self {
        Self {
            preset,
            ..Self::default()
        }
    }

    /// Similarity threshold for open-set values under the current preset.
    pub fn active_sim_threshold(&self) -> f64 {
        match self.preset {
            Preset::Supp => self.open_sim_threshold,
            Preset::Strict => self.strict_open_sim_threshold,
        }
    }

    pub fn weight(&self, key: &str) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let known: Vec<&str> = BinaryGlobal::ALL
            .iter()
            .map(|b| b.key())
            .chain([FUNCTION_TYPE_KEY, COUNT_WEIGHT_KEY])
            .collect();
        for (k, &w) in &self.weights {
            if !known.contains(&k.as_str()) {
                return Err(ConfigError::UnknownWeightKey(k.clone()));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(ConfigError::NegativeWeight(k.clone()));
            }
        }
        let sum: f64 = self.weights.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::WeightsDoNotSumToOne(sum));
        }
        for (name, value) in [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("open_sim_threshold", self.open_sim_threshold),
            ("strict_open_sim_threshold", self.strict_open_sim_threshold),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::ThresholdOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyDetail {
    pub path: String,
    pub matched: bool,
    pub similarity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Incorrect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    None,
    Unparsable,
    Score1,
    Score2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleJudgment {
    pub score1: f64,
    /// Absent when the sample stopped before the second gate.
    pub score2: Option<f64>,
    pub verdict: Verdict,
    pub stage_failed: Stage,
    pub per_key_detail: Vec<KeyDetail>,
}

impl SampleJudgment {
    pub fn is_correct(&self) -> bool {
        self.verdict == Verdict::Correct
    }
}

fn function_set(d: &SignDecomposition) -> BTreeSet<String> {
    d.function_labels().into_iter().collect()
}

/// Score over the top-level keys present in `gt`, with weights rescaled to
/// those keys. The count weight is split evenly over the ground truth's
/// count keys.
pub fn score_top_level(pred: &SignDecomposition, gt: &SignDecomposition, cfg: &EvalConfig) -> f64 {
    top_level_detail(pred, gt, cfg).0
}

fn top_level_detail(
    pred: &SignDecomposition,
    gt: &SignDecomposition,
    cfg: &EvalConfig,
) -> (f64, Vec<KeyDetail>) {
    let mut terms: Vec<(f64, KeyDetail)> = Vec::new();
    let mut push = |weight: f64, path: String, matched: bool| {
        terms.push((
            weight,
            KeyDetail {
                path,
                matched,
                similarity: if matched { 1.0 } else { 0.0 },
            },
        ))
    };

    for b in BinaryGlobal::ALL {
        if let Some(v) = gt.globals.get(b) {
            push(cfg.weight(b.key()), b.key().into(), pred.globals.get(b) == Some(v));
        }
    }
    if gt.function_type_text().is_some() {
        push(
            cfg.weight(FUNCTION_TYPE_KEY),
            FUNCTION_TYPE_KEY.into(),
            function_set(pred) == function_set(gt),
        );
    }
    let counted: Vec<_> = gt
        .groups
        .iter()
        .filter_map(|g| g.declared_count.map(|n| (g.function, n)))
        .collect();
    for &(f, n) in &counted {
        let predicted = pred.group(f).and_then(|g| g.declared_count);
        push(
            cfg.weight(COUNT_WEIGHT_KEY) / counted.len() as f64,
            f.count_label(),
            predicted == Some(n),
        );
    }

    let total: f64 = terms.iter().map(|(w, _)| w).sum();
    let score = if terms.is_empty() || total <= 0.0 {
        // Nothing weighted to check: either all present keys carry zero
        // weight or the ground truth has no top-level keys at all.
        if terms.iter().all(|(_, d)| d.matched) { 1.0 } else { 0.0 }
    } else {
        terms
            .iter()
            .filter(|(_, d)| d.matched)
            .map(|(w, _)| w)
            .sum::<f64>()
            / total
    };
    (score, terms.into_iter().map(|(_, d)| d).collect())
}

/// Mean per-FSU key agreement over the ground-truth FSUs.
pub fn score_fsus(pred: &SignDecomposition, gt: &SignDecomposition, cfg: &EvalConfig) -> f64 {
    fsu_detail(pred, gt, cfg, Schema::builtin()).0
}

/// Share of `g`'s keys matched by `p`, with per-key detail.
fn entry_agreement(
    g: &FsuEntry,
    p: Option<&FsuEntry>,
    path: &str,
    cfg: &EvalConfig,
    schema: &Schema,
) -> (f64, Vec<KeyDetail>) {
    if g.attrs.is_empty() {
        return (1.0, Vec::new());
    }
    let threshold = cfg.active_sim_threshold();
    let mut matched = 0usize;
    let mut detail = Vec::with_capacity(g.attrs.len());
    for (key, gv) in &g.attrs {
        let gt_text = gv.canonical_text();
        let (ok, sim) = match p.and_then(|p| p.get(key)) {
            None => (false, 0.0),
            Some(pv) => {
                let pred_text = pv.canonical_text();
                if schema.is_closed_set(g.function, key) {
                    let ok = pred_text == gt_text;
                    (ok, if ok { 1.0 } else { 0.0 })
                } else {
                    let sim = string_similarity(&pred_text, &gt_text);
                    (sim >= threshold - SCORE_EPS, sim)
                }
            }
        };
        matched += usize::from(ok);
        detail.push(KeyDetail {
            path: format!("{path}.{key}"),
            matched: ok,
            similarity: sim,
        });
    }
    (matched as f64 / g.attrs.len() as f64, detail)
}

fn fsu_detail(
    pred: &SignDecomposition,
    gt: &SignDecomposition,
    cfg: &EvalConfig,
    schema: &Schema,
) -> (f64, Vec<KeyDetail>) {
    let m_gt = gt.fsu_count();
    if m_gt == 0 {
        return (1.0, Vec::new());
    }
    let mut sum = 0.0;
    let mut details = Vec::new();
    for group in &gt.groups {
        let f = group.function;
        let pred_entries: &[FsuEntry] = pred.group(f).map_or(&[], |g| g.entries.as_slice());
        let partner: Vec<Option<usize>> = if f.is_ordered() {
            (0..group.entries.len())
                .map(|i| (i < pred_entries.len()).then_some(i))
                .collect()
        } else {
            let costs = CostMatrix::from_fn(group.entries.len(), pred_entries.len(), |i, j| {
                1.0 - entry_agreement(&group.entries[i], Some(&pred_entries[j]), "", cfg, schema).0
            })
            .expect("agreement lies in [0, 1]");
            let mut partner = vec![None; group.entries.len()];
            for (i, j) in linear_sum_assignment(&costs).pairs {
                partner[i] = Some(j);
            }
            partner
        };
        for (i, g) in group.entries.iter().enumerate() {
            let path = format!("{} {}", f.info_label(), i + 1);
            let (s, d) = entry_agreement(g, partner[i].map(|j| &pred_entries[j]), &path, cfg, schema);
            sum += s;
            details.extend(d);
        }
    }
    (sum / m_gt as f64, details)
}

pub fn judge_sample(raw: &str, gt: &SignDecomposition, cfg: &EvalConfig) -> SampleJudgment {
    judge_sample_with(raw, gt, cfg, Schema::builtin())
}

pub fn judge_sample_with(
    raw: &str,
    gt: &SignDecomposition,
    cfg: &EvalConfig,
    schema: &Schema,
) -> SampleJudgment {
    let response = parse_response_with(raw, ParseOptions::default(), schema);
    let Some(pred) = response.decomposition else {
        return SampleJudgment {
            score1: 0.0,
            score2: None,
            verdict: Verdict::Incorrect,
            stage_failed: Stage::Unparsable,
            per_key_detail: Vec::new(),
        };
    };
    let (score1, mut per_key_detail) = top_level_detail(&pred, gt, cfg);
    if score1 < cfg.eps1 - SCORE_EPS {
        return SampleJudgment {
            score1,
            score2: None,
            verdict: Verdict::Incorrect,
            stage_failed: Stage::Score1,
            per_key_detail,
        };
    }
    let (score2, detail) = fsu_detail(&pred, gt, cfg, schema);
    per_key_detail.extend(detail);
    let pass = score2 >= cfg.eps2 - SCORE_EPS;
    SampleJudgment {
        score1,
        score2: Some(score2),
        verdict: if pass { Verdict::Correct } else { Verdict::Incorrect },
        stage_failed: if pass { Stage::None } else { Stage::Score2 },
        per_key_detail,
    }
}

/// Category a sample is filed under when none is given explicitly.
pub fn category_of(gt: &SignDecomposition) -> Option<FunctionType> {
    gt.primary_function()
}
