use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use fsukit::batch::{build_samples, join_eval_items, join_score_requests, GroundTruthRecord, PredictionRecord};
use fsukit::distill::{
    assemble_sft, read_annotations, run_iteration, write_dataset, AnnotationRecord, DistillationState,
    HarvestedCaption, MockClient, ModelClient, ReplayClient,
};
use fsukit::eval::evaluate_benchmark_with;
use fsukit::jsonl::{read_jsonl, to_jsonl};
use fsukit::parser::{parse_dictionary_with, parse_response_with, FSU_CLOSE, FSU_OPEN};
use fsukit::reward::f_act;
use fsukit::schema::{Schema, SignDecomposition};
use fsukit::ted::ted;
use fsukit::tree::build_tree;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{BuildSftArgs, CheckArgs, Cli, Command, DistillArgs, EvalArgs, ScoreArgs, ServeArgs, TedArgs};
use crate::exit::{InvalidInput, UsageError};
use crate::model_client::HttpModelClient;
use crate::service::{serve, AppState};
use crate::settings::Settings;

pub const STATE_FILE: &str = "state.json";

// Stdout writes that surface a closed pipe as an error instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => {
        write!(io::stdout().lock(), $($arg)*)?
    };
}
macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(io::stdout().lock(), $($arg)*)?
    };
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let settings = Settings::load(&cli.global)?;
    match cli.command {
        Command::Check(a) => check(&settings, a),
        Command::Score(a) => score(&settings, a),
        Command::Eval(a) => eval(&settings, a),
        Command::Ted(a) => ted_cmd(&settings, a),
        Command::BuildSft(a) => build_sft(&settings, a),
        Command::Distill(a) => distill(&settings, a),
        Command::Serve(a) => serve_cmd(&settings, a),
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn check(s: &Settings, a: CheckArgs) -> anyhow::Result<ExitCode> {
    let input = a.input.filter(|p| p.as_os_str() != "-");
    if a.annotations {
        let path = input.ok_or_else(|| UsageError("--annotations needs a file".into()))?;
        return check_annotations(s, &path);
    }
    let raw = match &input {
        Some(p) => read_text(p)?,
        None => {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    let r = parse_response_with(&raw, s.config.parse, &s.schema);
    let violations = r.decomposition.as_ref().map(|d| s.schema.validate(d)).unwrap_or_default();
    let ok = r.format_ok && r.parse_ok && violations.is_empty();
    let report = json!({
        "format_ok": r.format_ok,
        "parse_ok": r.parse_ok,
        "caption": r.caption,
        "canonical": r.decomposition.as_ref().map(|d| s.schema.serialize(d)),
        "violations": violations,
        "diagnostics": r.parse_diagnostics,
    });
    outln!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn check_annotations(s: &Settings, path: &Path) -> anyhow::Result<ExitCode> {
    let records: Vec<AnnotationRecord> = read_jsonl(path)?;
    let mut bad = 0;
    for r in &records {
        match parse_dictionary_with(&r.ground_truth, &s.schema) {
            Err(e) => {
                bad += 1;
                outln!("{}: ground truth does not parse: {e}", r.image);
            }
            Ok((d, _)) => {
                let v = s.schema.validate(&d);
                if !v.is_empty() {
                    bad += 1;
                }
                for violation in v {
                    outln!("{}: {violation}", r.image);
                }
            }
        }
    }
    eprintln!("{} records, {bad} with problems", records.len());
    Ok(if bad == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn score(s: &Settings, a: ScoreArgs) -> anyhow::Result<ExitCode> {
    let preds: Vec<PredictionRecord> = read_jsonl(&a.pred)?;
    let gts: Vec<GroundTruthRecord> = read_jsonl(&a.gt)?;
    let requests = join_score_requests(&preds, &gts)?;
    let results = s.scorer().score_batch(&requests);
    write_output(a.out.as_deref(), &to_jsonl(&results))?;
    Ok(ExitCode::SUCCESS)
}

fn eval(s: &Settings, a: EvalArgs) -> anyhow::Result<ExitCode> {
    let preds: Vec<PredictionRecord> = read_jsonl(&a.pred)?;
    let gts: Vec<GroundTruthRecord> = read_jsonl(&a.gt)?;
    let items = join_eval_items(&preds, &gts)?;
    let samples = build_samples(&items, &s.schema).map_err(|problems| {
        let lines: Vec<String> = problems
            .iter()
            .map(|p| format!("{}:{}: {}", a.gt.display(), p.index + 1, p.message))
            .collect();
        InvalidInput(lines.join("\n"))
    })?;
    let report = evaluate_benchmark_with(&samples, &s.config.eval, &s.schema)?;
    out!("{}", report.table());
    if let Some(path) = &a.report {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Dictionary text, or a response whose FSU block is used.
fn load_decomposition(path: &Path, schema: &Schema) -> anyhow::Result<SignDecomposition> {
    let text = read_text(path)?;
    let body = match text.find(FSU_OPEN) {
        Some(i) => {
            let rest = &text[i + FSU_OPEN.len()..];
            rest.find(FSU_CLOSE).map_or(rest, |j| &rest[..j])
        }
        None => text.as_str(),
    };
    let (d, _) = parse_dictionary_with(body, schema)
        .map_err(|e| InvalidInput(format!("{}: not a key-value object: {e}", path.display())))?;
    Ok(d)
}

fn ted_cmd(s: &Settings, a: TedArgs) -> anyhow::Result<ExitCode> {
    let ta = build_tree(&load_decomposition(&a.a, &s.schema)?);
    let tb = build_tree(&load_decomposition(&a.b, &s.schema)?);
    if a.dump {
        out!("{}\n{}\n", ta.dump(), tb.dump());
    }
    let d = ted(&ta, &tb);
    outln!("{}", json!({"ted": d, "r_ted": f_act(d as f64, &s.config.reward)}));
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub image: String,
    pub caption: String,
}

fn build_sft(s: &Settings, a: BuildSftArgs) -> anyhow::Result<ExitCode> {
    let annotations = read_annotations(&a.annotations, &s.schema)?;
    let captions: Vec<CaptionRecord> = read_jsonl(&a.captions)?;
    let harvested: Vec<HarvestedCaption> = captions
        .into_iter()
        .map(|c| HarvestedCaption {
            image: c.image,
            caption: Some(c.caption),
            ok: true,
        })
        .collect();
    let mut opts = s.config.pipeline.assemble;
    if a.no_reason {
        opts.include_reason = false;
    }
    let assembly = assemble_sft(&harvested, &annotations, &opts, &s.schema);
    write_dataset(&a.out, &assembly.records)?;
    for f in &assembly.failures {
        eprintln!("{}: {}", f.image, f.reason);
    }
    eprintln!("{} records written to {}", assembly.records.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

enum Source {
    Mock,
    Http(HttpModelClient),
    Replay(ReplayClient),
}

fn distill(s: &Settings, a: DistillArgs) -> anyhow::Result<ExitCode> {
    let model = &s.config.model;
    let endpoint = a.endpoint.clone().or_else(|| model.url.clone());
    let source = if a.mock {
        Source::Mock
    } else if let Some(path) = &a.replay {
        Source::Replay(ReplayClient::from_path(path)?)
    } else if let Some(url) = endpoint {
        let name = a.model.clone().unwrap_or_else(|| model.name.clone());
        let timeout = Duration::from_secs(a.timeout.unwrap_or(model.timeout_secs));
        Source::Http(HttpModelClient::new(url, name, a.token.clone(), timeout)?)
    } else {
        return Err(UsageError("distill needs --endpoint, --replay, or --mock (or [model] url in the config)".into()).into());
    };

    let annotations = read_annotations(&a.annotations, &s.schema)?;
    let state_path = a.out_dir.join(STATE_FILE);
    let mut state = if a.resume && state_path.exists() {
        let state: DistillationState = serde_json::from_str(&read_text(&state_path)?)
            .with_context(|| format!("cannot parse {}", state_path.display()))?;
        if state.max_iterations != a.iterations {
            bail!(
                "{} was written for --iterations {}, not {}",
                state_path.display(),
                state.max_iterations,
                a.iterations
            );
        }
        state
    } else {
        DistillationState::new(a.iterations, &a.out_dir)
    };

    let mut cfg = s.config.pipeline;
    if let Some(n) = a.max_in_flight {
        cfg.harvest.max_in_flight = n;
    }
    if a.no_reason {
        cfg.assemble.include_reason = false;
    }

    let step = |state: &DistillationState, client: &dyn ModelClient| -> anyhow::Result<DistillationState> {
        let next = run_iteration(state, client, &annotations, &cfg, &s.schema)?;
        fs::write(&state_path, serde_json::to_string_pretty(&next)? + "\n")
            .with_context(|| format!("cannot write {}", state_path.display()))?;
        let rec = next.history.last().expect("iteration recorded");
        eprintln!(
            "iteration {}: {} records, {} failures -> {}",
            rec.iteration,
            rec.records_count,
            rec.failures.len(),
            rec.dataset_path.display()
        );
        Ok(next)
    };

    match source {
        Source::Mock => {
            // At least one step, so a finished state reports exhaustion.
            loop {
                let client = MockClient::new(format!("t{}", state.iteration));
                state = step(&state, &client)?;
                if state.is_finished() {
                    break;
                }
            }
        }
        Source::Http(client) => state = step(&state, &client)?,
        Source::Replay(client) => state = step(&state, &client)?,
    }
    if !state.is_finished() {
        eprintln!(
            "fine-tune on {} and rerun with --resume and the new endpoint for iteration {}",
            state.dataset_path(state.iteration - 1).display(),
            state.iteration
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn serve_cmd(s: &Settings, a: ServeArgs) -> anyhow::Result<ExitCode> {
    let addr: std::net::SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| UsageError(format!("bad listen address: {e}")))?;
    let state = AppState::from_settings(s, a.token);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(serve(state, addr))?;
    Ok(ExitCode::SUCCESS)
}
