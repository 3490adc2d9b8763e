use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fsukit::eval::Preset;

#[derive(Debug, Parser)]
#[command(name = "fsukit", version, about = "Structured traffic-sign output toolkit: parsing, rewards, evaluation, distillation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Open-set similarity preset for evaluation.
    #[arg(long, global = true, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    #[arg(long, global = true)]
    pub sigma1: Option<f64>,
    #[arg(long, global = true)]
    pub sigma2: Option<f64>,
    #[arg(long, global = true)]
    pub sigma3: Option<f64>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate one response, or every record of an annotation file.
    Check(CheckArgs),
    /// Score predictions against ground truth (one result line per prediction).
    Score(ScoreArgs),
    /// Judge predictions against a benchmark and print the accuracy table.
    Eval(EvalArgs),
    /// Tree edit distance between two dictionaries or responses.
    Ted(TedArgs),
    /// Build an SFT dataset from annotations and already-harvested captions.
    BuildSft(BuildSftArgs),
    /// Run the caption distillation loop.
    Distill(DistillArgs),
    /// Serve the reward and evaluation endpoints over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Response file; `-` or absent reads stdin.
    pub input: Option<PathBuf>,
    /// Treat the input as an annotation JSONL file.
    #[arg(long)]
    pub annotations: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Predictions JSONL: {"id", "response_text"}.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground truth JSONL: {"id", "ground_truth", "category"?}.
    #[arg(long)]
    pub gt: PathBuf,
    /// Output JSONL; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Where to write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TedArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Also print both trees.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Args)]
pub struct BuildSftArgs {
    /// Annotation JSONL: {"image", "ground_truth"}.
    #[arg(long)]
    pub annotations: PathBuf,
    /// Caption JSONL: {"image", "caption"}.
    #[arg(long)]
    pub captions: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Emit only caption-then-FSU records.
    #[arg(long)]
    pub no_reason: bool,
}

#[derive(Debug, Args)]
pub struct DistillArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    /// Directory for `dataset_t<k>.jsonl` and `state.json`.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Last iteration index; iterations 0..=N are run.
    #[arg(long, default_value_t = 2)]
    pub iterations: u32,
    /// Use the deterministic offline client for every iteration.
    #[arg(long, conflicts_with_all = ["endpoint", "replay"])]
    pub mock: bool,
    /// Chat-completions URL of the current model (runs one iteration).
    #[arg(long, conflicts_with = "replay")]
    pub endpoint: Option<String>,
    /// Recorded transcript JSONL {"image", "response"} (runs one iteration).
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, env = "FSUKIT_MODEL_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
    /// Per-request timeout in seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    /// Continue from `state.json` in the output directory.
    #[arg(long)]
    pub resume: bool,
    /// Emit only caption-then-FSU records.
    #[arg(long)]
    pub no_reason: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "FSUKIT_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Require `Authorization: Bearer <token>` on /v1 routes.
    #[arg(long, env = "FSUKIT_SERVICE_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
}
