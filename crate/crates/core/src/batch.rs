//! Wire records and the single scoring path shared by the CLI and the
//! reward service.

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::JoinError;
use crate::eval::BenchmarkSample;
use crate::parser::{parse_dictionary_with, ParseOptions};
use crate::reward::{reward_mixed_with, RewardBreakdown, RewardConfig};
use crate::schema::{FunctionType, Schema};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub id: String,
    pub response_text: String,
    /// Canonical dictionary text.
    pub ground_truth: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub id: String,
    pub r_cfsu: u8,
    pub r_fsu: u8,
    pub ted: Option<u64>,
    pub r_ted: f64,
    pub r_mixed: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl ScoreResult {
    fn from_breakdown(id: &str, b: RewardBreakdown, diagnostics: Vec<String>) -> Self {
        Self {
            id: id.to_string(),
            r_cfsu: b.r_cfsu,
            r_fsu: b.r_fsu,
            ted: b.ted,
            r_ted: b.r_ted,
            r_mixed: b.r_mixed,
            diagnostics,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub response_text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub id: String,
    pub ground_truth: String,
    /// Benchmark column; defaults to the function of the first FSU group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<FunctionType>,
}

/// One benchmark sample on the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalItem {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<FunctionType>,
    pub response_text: String,
    pub ground_truth: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemDiagnostic {
    pub index: usize,
    pub id: String,
    pub message: String,
}

/// Scores responses against dictionary-text ground truths.
#[derive(Clone, Debug)]
pub struct Scorer {
    pub reward: RewardConfig,
    pub parse: ParseOptions,
    pub schema: Arc<Schema>,
}

impl Default for Scorer {
    fn default() -> Self {
        Self::new(RewardConfig::default(), ParseOptions::default(), Arc::new(Schema::builtin().clone()))
    }
}

impl Scorer {
    pub fn new(reward: RewardConfig, parse: ParseOptions, schema: Arc<Schema>) -> Self {
        Self {
            reward,
            parse,
            schema,
        }
    }

    /// Never fails: an item that cannot be scored gets zero rewards and a
    /// diagnostic.
    pub fn score(&self, req: &ScoreRequest) -> ScoreResult {
        let outcome = catch_unwind(AssertUnwindSafe(|| self.score_inner(req)));
        outcome.unwrap_or_else(|_| {
            ScoreResult::from_breakdown(
                &req.id,
                RewardBreakdown::zero(),
                vec!["internal scoring fault".into()],
            )
        })
    }

    fn score_inner(&self, req: &ScoreRequest) -> ScoreResult {
        match parse_dictionary_with(&req.ground_truth, &self.schema) {
            Err(e) => ScoreResult::from_breakdown(
                &req.id,
                RewardBreakdown::zero(),
                vec![format!("ground truth is not a key-value object: {e}")],
            ),
            Ok((gt, _)) => {
                let b = reward_mixed_with(&req.response_text, &gt, &self.reward, self.parse, &self.schema);
                ScoreResult::from_breakdown(&req.id, b, Vec::new())
            }
        }
    }

    /// Scores items in parallel; output order follows input order.
    pub fn score_batch(&self, reqs: &[ScoreRequest]) -> Vec<ScoreResult> {
        reqs.par_iter().map(|r| self.score(r)).collect()
    }
}

fn index_ground_truth(gts: &[GroundTruthRecord]) -> Result<HashMap<&str, &GroundTruthRecord>, JoinError> {
    let mut by_id = HashMap::with_capacity(gts.len());
    for g in gts {
        if by_id.insert(g.id.as_str(), g).is_some() {
            return Err(JoinError::DuplicateId(g.id.clone()));
        }
    }
    Ok(by_id)
}

/// Pairs each prediction with its ground truth, in prediction order.
pub fn join_score_requests(
    preds: &[PredictionRecord],
    gts: &[GroundTruthRecord],
) -> Result<Vec<ScoreRequest>, JoinError> {
    let by_id = index_ground_truth(gts)?;
    preds
        .iter()
        .map(|p| {
            let g = by_id.get(p.id.as_str()).ok_or_else(|| JoinError::MissingGroundTruth { id: p.id.clone() })?;
            Ok(ScoreRequest {
                id: p.id.clone(),
                response_text: p.response_text.clone(),
                ground_truth: g.ground_truth.clone(),
            })
        })
        .collect()
}

/// One item per ground truth, in ground-truth order. A ground truth without
/// a prediction is judged against an empty response.
pub fn join_eval_items(
    preds: &[PredictionRecord],
    gts: &[GroundTruthRecord],
) -> Result<Vec<EvalItem>, JoinError> {
    let by_id = index_ground_truth(gts)?;
    let mut responses = HashMap::with_capacity(preds.len());
    for p in preds {
        if !by_id.contains_key(p.id.as_str()) {
            return Err(JoinError::MissingGroundTruth { id: p.id.clone() });
        }
        if responses.insert(p.id.as_str(), p.response_text.as_str()).is_some() {
            return Err(JoinError::DuplicateId(p.id.clone()));
        }
    }
    Ok(gts
        .iter()
        .map(|g| EvalItem {
            id: g.id.clone(),
            category: g.category,
            response_text: responses.get(g.id.as_str()).copied().unwrap_or_default().to_string(),
            ground_truth: g.ground_truth.clone(),
        })
        .collect())
}

/// Parses the ground truths of `items`. Every unusable item is reported.
pub fn build_samples(items: &[EvalItem], schema: &Schema) -> Result<Vec<BenchmarkSample>, Vec<ItemDiagnostic>> {
    let mut samples = Vec::with_capacity(items.len());
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for (index, item) in items.iter().enumerate() {
        let mut problem = |message: String| {
            problems.push(ItemDiagnostic {
                index,
                id: item.id.clone(),
                message,
            })
        };
        if !seen.insert(item.id.as_str()) {
            problem("duplicate id".into());
            continue;
        }
        match parse_dictionary_with(&item.ground_truth, schema) {
            Err(e) => problem(format!("ground truth is not a key-value object: {e}")),
            Ok((gt, _)) => match item.category.or_else(|| gt.primary_function()) {
                None => problem("no category given and the ground truth declares no function".into()),
                Some(category) => samples.push(BenchmarkSample {
                    id: item.id.clone(),
                    category,
                    raw: item.response_text.clone(),
                    gt,
                }),
            },
        }
    }
    if problems.is_empty() {
        Ok(samples)
    } else {
        Err(problems)
    }
}
