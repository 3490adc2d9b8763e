use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{judge_sample_with, EvalConfig, SampleJudgment};
use crate::error::EvalError;
use crate::schema::{FunctionType, Schema, SignDecomposition};

#[derive(Clone, Debug)]
pub struct BenchmarkSample {
    pub id: String,
    pub category: FunctionType,
    pub raw: String,
    pub gt: SignDecomposition,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub id: String,
    pub category: FunctionType,
    #[serde(flatten)]
    pub judgment: SampleJudgment,
}

/// Per-category accuracy. Categories with no samples are left out of
/// `per_category` and of the average.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_category: BTreeMap<FunctionType, CategoryStats>,
    /// Sample-weighted: total correct over total samples. 0 when empty.
    pub average: f64,
    pub total_n: usize,
    pub total_correct: usize,
    pub samples: Vec<SampleResult>,
}

pub fn evaluate_benchmark(samples: &[BenchmarkSample], cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    evaluate_benchmark_with(samples, cfg, Schema::builtin())
}

pub fn evaluate_benchmark_with(
    samples: &[BenchmarkSample],
    cfg: &EvalConfig,
    schema: &Schema,
) -> Result<EvalReport, EvalError> {
    let mut seen = HashSet::new();
    for s in samples {
        if !seen.insert(s.id.as_str()) {
            return Err(EvalError::DuplicateId(s.id.clone()));
        }
    }
    let judged: Vec<SampleResult> = samples
        .par_iter()
        .map(|s| SampleResult {
            id: s.id.clone(),
            category: s.category,
            judgment: judge_sample_with(&s.raw, &s.gt, cfg, schema),
        })
        .collect();

    let mut per_category: BTreeMap<FunctionType, CategoryStats> = BTreeMap::new();
    for r in &judged {
        let stats = per_category.entry(r.category).or_insert(CategoryStats {
            n: 0,
            correct: 0,
            accuracy: 0.0,
        });
        stats.n += 1;
        stats.correct += usize::from(r.judgment.is_correct());
    }
    for stats in per_category.values_mut() {
        stats.accuracy = stats.correct as f64 / stats.n as f64;
    }
    let total_n = judged.len();
    let total_correct = per_category.values().map(|s| s.correct).sum();
    Ok(EvalReport {
        per_category,
        average: if total_n == 0 {
            0.0
        } else {
            total_correct as f64 / total_n as f64
        },
        total_n,
        total_correct,
        samples: judged,
    })
}

const COLUMNS: [&str; 5] = ["Direction", "Notice", "Lane", "Const.", "Avg."];

impl EvalReport {
    /// Column values as percentages with two decimals, `-` for columns
    /// without samples.
    pub fn row(&self) -> [String; 5] {
        let pct = |x: f64| format!("{:.2}", x * 100.0);
        let mut out: [String; 5] = Default::default();
        for (i, f) in FunctionType::ALL.into_iter().enumerate() {
            out[i] = self
                .per_category
                .get(&f)
                .map_or_else(|| "-".to_string(), |s| pct(s.accuracy));
        }
        out[4] = if self.total_n == 0 {
            "-".to_string()
        } else {
            pct(self.average)
        };
        out
    }

    pub fn table(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = self.row();
        let widths: Vec<usize> = COLUMNS
            .iter()
            .zip(&row)
            .map(|(h, v)| h.len().max(v.len()))
            .collect();
        let line = |cells: &[&str]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        writeln!(f, "{}", line(&COLUMNS))?;
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        writeln!(f, "{}", line(&cells))
    }
}
