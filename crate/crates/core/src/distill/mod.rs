//! Iterative caption distillation: harvest captions from the current model,
//! pair them with the FSU annotations, and write the SFT dataset for the
//! next round. Training happens elsewhere.

mod client;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{DatasetError, DistillError};
use crate::jsonl::{read_jsonl, write_jsonl};
use crate::parser::{CAPTION_CLOSE, CAPTION_OPEN, FSU_CLOSE, FSU_OPEN, TAGS};
use crate::schema::{Schema, SignDecomposition};

pub use client::{MockClient, ModelClient, ReplayClient, RetryPolicy, TranscriptEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Caption,
    Reason,
    CapFsu,
}

impl PromptKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptKind::Caption => "caption",
            PromptKind::Reason => "reason",
            PromptKind::CapFsu => "cap_fsu",
        }
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub kind: PromptKind,
    pub text: String,
}

impl PromptTemplate {
    /// The instruction texts shipped in `prompts/`.
    pub fn builtin(kind: PromptKind) -> PromptTemplate {
        let text = match kind {
            PromptKind::Caption => include_str!("../../prompts/caption.txt"),
            PromptKind::Reason => include_str!("../../prompts/reason.txt"),
            PromptKind::CapFsu => include_str!("../../prompts/cap_fsu.txt"),
        };
        PromptTemplate {
            kind,
            text: text.trim_end().to_string(),
        }
    }
}

/// An image with its FSU ground truth. On disk the ground truth is the
/// canonical dictionary text.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub image: String,
    pub gt: SignDecomposition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub image: String,
    pub ground_truth: String,
}

impl Annotation {
    pub fn to_record(&self, schema: &Schema) -> AnnotationRecord {
        AnnotationRecord {
            image: self.image.clone(),
            ground_truth: schema.serialize(&self.gt),
        }
    }
}

/// Reads an annotation file, parsing each ground truth.
pub fn read_annotations(path: impl AsRef<Path>, schema: &Schema) -> Result<Vec<Annotation>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| DatasetError::MalformedLine {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let record: AnnotationRecord =
            serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let (gt, _) = crate::parser::parse_dictionary_with(&record.ground_truth, schema)
            .map_err(|e| malformed(format!("ground truth does not parse: {e}")))?;
        out.push(Annotation {
            image: record.image,
            gt,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub image: String,
    pub prompt_kind: PromptKind,
    pub prompt: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestedCaption {
    pub image: String,
    pub caption: Option<String>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub image: String,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarvestConfig {
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        Self {
            max_in_flight: 8,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Harvest {
    /// In annotation order.
    pub captions: Vec<HarvestedCaption>,
    pub failures: Vec<Failure>,
}

/// The caption block's inner text if the reply has one, else the reply
/// unchanged.
pub fn extract_caption(reply: &str) -> String {
    if let Some(start) = reply.find(CAPTION_OPEN) {
        let rest = &reply[start + CAPTION_OPEN.len()..];
        if let Some(end) = rest.find(CAPTION_CLOSE) {
            return rest[..end].to_string();
        }
    }
    reply.to_string()
}

/// Asks `client` for one caption per annotation with at most
/// `cfg.max_in_flight` concurrent calls. Failed calls are recorded and the
/// batch carries on.
pub fn harvest_captions(annotations: &[Annotation], client: &dyn ModelClient, cfg: &HarvestConfig) -> Harvest {
    let prompt = PromptTemplate::builtin(PromptKind::Caption).text;
    let slots: Vec<Mutex<Option<Result<String, String>>>> =
        annotations.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.max_in_flight.max(1).min(annotations.len());
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(a) = annotations.get(i) else { break };
                let result = cfg
                    .retry
                    .run(|| client.generate(&a.image, &prompt))
                    .map(|reply| extract_caption(&reply))
                    .map_err(|e| e.reason().to_string());
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });

    let mut captions = Vec::with_capacity(annotations.len());
    let mut failures = Vec::new();
    for (a, slot) in annotations.iter().zip(slots) {
        match slot.into_inner().expect("slot lock").expect("every slot is filled") {
            Ok(caption) => captions.push(HarvestedCaption {
                image: a.image.clone(),
                caption: Some(caption),
                ok: true,
            }),
            Err(reason) => {
                failures.push(Failure {
                    image: a.image.clone(),
                    reason,
                });
                captions.push(HarvestedCaption {
                    image: a.image.clone(),
                    caption: None,
                    ok: false,
                });
            }
        }
    }
    Harvest { captions, failures }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssembleOptions {
    /// Also emit one reasoning-format record per annotation.
    pub include_reason: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            include_reason: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assembly {
    pub records: Vec<SftRecord>,
    pub failures: Vec<Failure>,
}

pub fn cap_fsu_target(caption: &str, gt: &SignDecomposition, schema: &Schema) -> String {
    format!(
        "{CAPTION_OPEN}{caption}{CAPTION_CLOSE}{FSU_OPEN}{}{FSU_CLOSE}",
        schema.serialize(gt)
    )
}

pub fn reason_target(gt: &SignDecomposition, schema: &Schema) -> String {
    format!("{FSU_OPEN}{}{FSU_CLOSE}", schema.serialize(gt))
}

/// Builds the SFT records, ordered by image reference and then prompt kind.
/// Annotations without a usable caption lose their caption record only.
pub fn assemble_sft(
    captions: &[HarvestedCaption],
    annotations: &[Annotation],
    opts: &AssembleOptions,
    schema: &Schema,
) -> Assembly {
    let by_image: BTreeMap<&str, &HarvestedCaption> = captions
        .iter()
        .filter(|c| c.ok)
        .map(|c| (c.image.as_str(), c))
        .collect();
    let cap_prompt = PromptTemplate::builtin(PromptKind::CapFsu).text;
    let reason_prompt = PromptTemplate::builtin(PromptKind::Reason).text;

    let mut order: Vec<&Annotation> = annotations.iter().collect();
    order.sort_by(|a, b| a.image.cmp(&b.image));

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for a in order {
        let fail = |reason: &str| Failure {
            image: a.image.clone(),
            reason: reason.into(),
        };
        match by_image.get(a.image.as_str()).and_then(|c| c.caption.as_deref()) {
            None => failures.push(fail("MissingCaption")),
            Some(caption) if TAGS.iter().any(|t| caption.contains(t)) => {
                failures.push(fail("TagCollision"))
            }
            Some(caption) => records.push(SftRecord {
                image: a.image.clone(),
                prompt_kind: PromptKind::CapFsu,
                prompt: cap_prompt.clone(),
                target: cap_fsu_target(caption, &a.gt, schema),
            }),
        }
        if opts.include_reason {
            records.push(SftRecord {
                image: a.image.clone(),
                prompt_kind: PromptKind::Reason,
                prompt: reason_prompt.clone(),
                target: reason_target(&a.gt, schema),
            });
        }
    }
    Assembly { records, failures }
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[SftRecord]) -> Result<(), DatasetError> {
    write_jsonl(path, records)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<SftRecord>, DatasetError> {
    read_jsonl(path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    pub dataset_path: PathBuf,
    /// Model that produced this iteration's captions.
    pub model_endpoint: String,
    pub records_count: usize,
    pub failures: Vec<Failure>,
}

/// Bookkeeping for the distillation loop, which runs iterations
/// `0..=max_iterations`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillationState {
    /// Next iteration to run.
    pub iteration: u32,
    pub max_iterations: u32,
    pub output_dir: PathBuf,
    /// Which weights the caller fine-tunes each round (for example `base`
    /// when every round starts from the original model). Recorded only.
    pub sft_init: String,
    pub history: Vec<IterationRecord>,
}

impl DistillationState {
    pub fn new(max_iterations: u32, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            iteration: 0,
            max_iterations,
            output_dir: output_dir.into(),
            sft_init: "base".into(),
            history: Vec::new(),
        }
    }

    pub fn is_finished(&self) -> bool {
        self.iteration > self.max_iterations
    }

    pub fn dataset_path(&self, iteration: u32) -> PathBuf {
        self.output_dir.join(format!("dataset_t{iteration}.jsonl"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub harvest: HarvestConfig,
    pub assemble: AssembleOptions,
}

/// Harvests, assembles and writes the dataset for `state.iteration`, and
/// returns the state advanced by one.
pub fn run_iteration(
    state: &DistillationState,
    client: &dyn ModelClient,
    annotations: &[Annotation],
    cfg: &PipelineConfig,
    schema: &Schema,
) -> Result<DistillationState, DistillError> {
    if state.is_finished() {
        return Err(DistillError::IterationExhausted {
            next: state.iteration,
            max: state.max_iterations,
        });
    }
    let t = state.iteration;
    let harvest = harvest_captions(annotations, client, &cfg.harvest);
    let assembly = assemble_sft(&harvest.captions, annotations, &cfg.assemble, schema);
    let path = state.dataset_path(t);
    std::fs::create_dir_all(&state.output_dir).map_err(|source| DatasetError::Io {
        path: state.output_dir.clone(),
        source,
    })?;
    write_dataset(&path, &assembly.records)?;

    let mut failures = harvest.failures;
    failures.extend(assembly.failures);
    failures.sort_by(|a, b| (&a.image, &a.reason).cmp(&(&b.image, &b.reason)));
    failures.dedup();

    let mut next = state.clone();
    next.iteration = t + 1;
    next.history.push(IterationRecord {
        iteration: t,
        dataset_path: path,
        model_endpoint: client.endpoint(),
        records_count: assembly.records.len(),
        failures,
    });
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ClientError;
    use crate::schema::{AttrValue, FsuEntry, FunctionType};

    fn annotation(image: &str) -> Annotation {
        let mut gt = SignDecomposition::new();
        gt.group_or_insert(FunctionType::Notice).push(
            FsuEntry::new(FunctionType::Notice, 0).with("Speed", AttrValue::scalar("40")),
        );
        Annotation {
            image: image.into(),
            gt,
        }
    }

    struct Fixed(&'static str);

    impl ModelClient for Fixed {
        fn generate(&self, _: &str, _: &str) -> Result<String, ClientError> {
            Ok(self.0.to_string())
        }
        fn endpoint(&self) -> String {
            "fixed".into()
        }
    }

    #[test]
    fn prompts_ask_for_the_right_blocks() {
        let cap = PromptTemplate::builtin(PromptKind::CapFsu).text;
        assert!(cap.contains("<caption>") && cap.contains("<FSU>"));
        let reason = PromptTemplate::builtin(PromptKind::Reason).text;
        assert!(reason.contains("<FSU>") && !reason.contains("<caption>"));
        let caption = PromptTemplate::builtin(PromptKind::Caption).text;
        assert!(caption.contains("<caption>") && !caption.contains("<FSU>"));
    }

    #[test]
    fn caption_extraction() {
        assert_eq!(extract_caption("pre <caption> a b </caption> post"), " a b ");
        assert_eq!(extract_caption("just text"), "just text");
        assert_eq!(extract_caption("<caption>open"), "<caption>open");
    }

    #[test]
    fn assembly_layout_and_rejections() {
        let schema = Schema::builtin();
        let anns = vec![annotation("b"), annotation("a"), annotation("c")];
        let caps = vec![
            HarvestedCaption { image: "a".into(), caption: Some("x </caption> y".into()), ok: true },
            HarvestedCaption { image: "b".into(), caption: Some(String::new()), ok: true },
        ];
        let out = assemble_sft(&caps, &anns, &AssembleOptions::default(), schema);
        let kinds: Vec<(&str, PromptKind)> = out
            .records
            .iter()
            .map(|r| (r.image.as_str(), r.prompt_kind))
            .collect();
        assert_eq!(
            kinds,
            vec![
                ("a", PromptKind::Reason),
                ("b", PromptKind::CapFsu),
                ("b", PromptKind::Reason),
                ("c", PromptKind::Reason)
            ]
        );
        assert_eq!(
            out.failures,
            vec![
                Failure { image: "a".into(), reason: "TagCollision".into() },
                Failure { image: "c".into(), reason: "MissingCaption".into() }
            ]
        );
        assert_eq!(
            out.records[1].target,
            format!("<caption></caption><FSU>{}</FSU>", schema.serialize(&anns[0].gt))
        );
    }

    #[test]
    fn harvest_unwraps_caption_blocks() {
        let anns: Vec<Annotation> = (0..20).map(|i| annotation(&format!("img{i:02}"))).collect();
        let h = harvest_captions(&anns, &Fixed("<caption>blue sign</caption>"), &HarvestConfig::default());
        assert!(h.failures.is_empty());
        assert!(h.captions.iter().all(|c| c.caption.as_deref() == Some("blue sign")));
        assert_eq!(h.captions[7].image, "img07");
    }

    #[test]
    fn iterations_stop_after_max() {
        let dir = tempfile::tempdir().unwrap();
        let anns = vec![annotation("a")];
        let mut state = DistillationState::new(1, dir.path());
        let cfg = PipelineConfig::default();
        for t in 0..=1 {
            state = run_iteration(&state, &MockClient::new(format!("t{t}")), &anns, &cfg, Schema::builtin()).unwrap();
        }
        assert_eq!(state.history.len(), 2);
        assert!(matches!(
            run_iteration(&state, &MockClient::new("x"), &anns, &cfg, Schema::builtin()),
            Err(DistillError::IterationExhausted { next: 2, max: 1 })
        ));
        assert_eq!(read_dataset(&state.history[1].dataset_path).unwrap().len(), 2);
    }
}
