#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fsukit::jsonl::write_jsonl;
use fsukit::schema::Schema;
use fsukit_testkit::synth;
use serde_json::json;

pub fn fsukit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fsukit"))
}

pub fn run(args: &[&str]) -> Output {
    fsukit().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn wrap(dictionary: &str) -> String {
    format!("<caption>A sign.</caption><FSU>{dictionary}</FSU>")
}

pub fn write_lines(path: &Path, lines: &[serde_json::Value]) {
    write_jsonl(path, lines).unwrap();
}

/// Synthetic annotation file with `n` images.
pub fn annotation_file(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let path = dir.join("annotations.jsonl");
    let records: Vec<_> = synth::annotations(n, seed).iter().map(|a| a.to_record(Schema::builtin())).collect();
    write_jsonl(&path, &records).unwrap();
    path
}

/// Benchmark ground truth plus identity predictions.
pub fn identity_benchmark(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    let gts = synth::benchmark_records(seed);
    let preds: Vec<_> = gts
        .iter()
        .map(|g| json!({"id": g.id, "response_text": wrap(&g.ground_truth)}))
        .collect();
    let gt_path = dir.join("gt.jsonl");
    let pred_path = dir.join("pred.jsonl");
    write_jsonl(&gt_path, &gts).unwrap();
    write_lines(&pred_path, &preds);
    (pred_path, gt_path)
}

const GLOBALS: &str = r#""Traffic Sign": "Yes", "Electronic Sign": "No", "Obstruction": "No", "Truncation": "No", "Blur": "No""#;
const FLIPPED: &str = r#""Traffic Sign": "No", "Electronic Sign": "Yes", "Obstruction": "Yes", "Truncation": "Yes", "Blur": "Yes""#;
const BLUR_ONLY: &str = r#""Traffic Sign": "Yes", "Electronic Sign": "No", "Obstruction": "No", "Truncation": "No", "Blur": "Yes""#;

fn direction(globals: &str, e1: (&str, &str), e2: (&str, &str)) -> String {
    format!(
        r#"{{{globals}, "Function Type": "Direction", "Number of Direction Information": "2", "Direction Information 1": {{"Direction": "{}", "Destination": "{}"}}, "Direction Information 2": {{"Direction": "{}", "Destination": "{}"}}}}"#,
        e1.0, e1.1, e2.0, e2.1
    )
}

fn lane(e1: (&str, &str), e2: (&str, &str)) -> String {
    format!(
        r#"{{{GLOBALS}, "Function Type": "Lane", "Number of Lane Information": "2", "Lane Information 1": {{"Turn": "{}", "Speed": "{}"}}, "Lane Information 2": {{"Turn": "{}", "Speed": "{}"}}}}"#,
        e1.0, e1.1, e2.0, e2.1
    )
}

fn notice(globals: &str) -> String {
    format!(
        r#"{{{globals}, "Function Type": "Notice", "Number of Notice Information": "1", "Notice Information 1": {{"Vehicle Type": "Truck", "Time": "7-9"}}}}"#
    )
}

fn construction(label: &str) -> String {
    format!(
        r#"{{{GLOBALS}, "Function Type": "{label}", "Number of {label} Information": "1", "{label} Information 1": {{"Construction Site": "Bridge"}}}}"#
    )
}

/// Ten hand-built samples as (id, gt, response, expected verdict).
pub fn golden_ten() -> Vec<(&'static str, String, String, bool)> {
    let a = ("Turn Left", "Fulong Rd");
    let b = ("Go Straight", "Mingle Rd");
    let gt_dir = direction(GLOBALS, a, b);
    let l1 = ("Turn Left", "60");
    let l2 = ("Go Straight", "100");
    let gt_lane = lane(l1, l2);
    vec![
        ("d1", gt_dir.clone(), wrap(&gt_dir), true),
        // Unordered: the swap is undone by the assignment.
        ("d2", gt_dir.clone(), wrap(&direction(GLOBALS, b, a)), true),
        // Half of each entry's keys match: exactly on the second gate.
        ("d3", gt_dir.clone(), wrap(&direction(GLOBALS, ("Turn Left", "qqqqqqqqq"), ("Go Straight", "zzzzzzzzz"))), true),
        ("d4", gt_dir.clone(), wrap(&direction(GLOBALS, ("Turn Right", "qqqqqqqqq"), ("Turn Right", "zzzzzzzzz"))), false),
        ("l1", gt_lane.clone(), wrap(&gt_lane), true),
        // Ordered: swapped lanes agree on nothing ("60" vs "100" is below 0.5).
        ("l2", gt_lane.clone(), wrap(&lane(l2, l1)), false),
        ("l3", gt_lane.clone(), wrap("Lane: left, then straight"), false),
        // All five binaries wrong: top-level score 0.6.
        ("n1", notice(GLOBALS), wrap(&notice(FLIPPED)), false),
        // Only Blur wrong: 0.925.
        ("n2", notice(GLOBALS), wrap(&notice(BLUR_ONLY)), true),
        // Wrong function and missing count key: 0.4.
        ("c1", construction("Construction"), wrap(&construction("Notice")), false),
    ]
}

pub fn golden_ten_files(dir: &Path) -> (PathBuf, PathBuf) {
    let samples = golden_ten();
    let gt_path = dir.join("gt10.jsonl");
    let pred_path = dir.join("pred10.jsonl");
    write_lines(&gt_path, &samples.iter().map(|(id, gt, _, _)| json!({"id": id, "ground_truth": gt})).collect::<Vec<_>>());
    write_lines(&pred_path, &samples.iter().map(|(id, _, r, _)| json!({"id": id, "response_text": r})).collect::<Vec<_>>());
    (pred_path, gt_path)
}
