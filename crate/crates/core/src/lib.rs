//! Functional Structure Unit toolkit for traffic-sign reasoning models:
//! the FSU schema, a tolerant response parser, tree edit distance rewards,
//! the structure evaluator and the caption distillation pipeline.

pub mod assignment;
pub mod batch;
pub mod config;
pub mod distill;
pub mod error;
pub mod eval;
pub mod jsonl;
pub mod parser;
pub mod reward;
pub mod schema;
pub mod ted;
pub mod text;
pub mod tree;

pub use parser::{parse_response, ModelResponse};
pub use reward::{f_act, reward_mixed, RewardBreakdown, RewardConfig};
pub use schema::{canonical_serialize, validate, Schema, SignDecomposition};
pub use ted::ted;
pub use tree::{build_tree, TreeNode};
