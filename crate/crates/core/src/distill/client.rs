use std::collections::HashMap;
use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{ClientError, DatasetError};
use crate::jsonl::read_jsonl;

/// A vision-language model seen as a black box.
pub trait ModelClient: Send + Sync {
    fn generate(&self, image_ref: &str, prompt: &str) -> Result<String, ClientError>;

    /// Identifies the model behind the client; recorded in pipeline state.
    fn endpoint(&self) -> String;
}

impl<C: ModelClient + ?Sized> ModelClient for &C {
    fn generate(&self, image_ref: &str, prompt: &str) -> Result<String, ClientError> {
        (**self).generate(image_ref, prompt)
    }

    fn endpoint(&self) -> String {
        (**self).endpoint()
    }
}

impl<C: ModelClient + ?Sized> ModelClient for Box<C> {
    fn generate(&self, image_ref: &str, prompt: &str) -> Result<String, ClientError> {
        (**self).generate(image_ref, prompt)
    }

    fn endpoint(&self) -> String {
        (**self).endpoint()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 2,
            initial_backoff_ms: 200,
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self {
            max_retries: 0,
            ..Self::default()
        }
    }

    /// Delay before retry number `attempt` (1-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = self.multiplier.powi(attempt.saturating_sub(1) as i32);
        Duration::from_millis((self.initial_backoff_ms as f64 * factor) as u64)
    }

    /// Runs `call` until it succeeds, fails permanently, or the retries run
    /// out. Returns the last error in the latter cases.
    pub fn run<T>(&self, mut call: impl FnMut() -> Result<T, ClientError>) -> Result<T, ClientError> {
        let mut attempt = 0;
        loop {
            match call() {
                Ok(v) => return Ok(v),
                Err(e) if e.is_retryable() && attempt < self.max_retries => {
                    attempt += 1;
                    thread::sleep(self.backoff(attempt));
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Deterministic offline client: every reply is a caption block built from
/// the client tag and the image reference.
#[derive(Clone, Debug)]
pub struct MockClient {
    tag: String,
}

impl MockClient {
    pub fn new(tag: impl Into<String>) -> Self {
        Self { tag: tag.into() }
    }
}

impl ModelClient for MockClient {
    fn generate(&self, image_ref: &str, _prompt: &str) -> Result<String, ClientError> {
        Ok(format!(
            "<caption>[{}] Traffic sign in image {image_ref}.</caption>",
            self.tag
        ))
    }

    fn endpoint(&self) -> String {
        format!("mock://{}", self.tag)
    }
}

/// One recorded exchange with a model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub image: String,
    pub response: String,
}

/// Answers from a recorded transcript, keyed by image reference.
#[derive(Clone, Debug)]
pub struct ReplayClient {
    name: String,
    responses: HashMap<String, String>,
}

impl ReplayClient {
    pub fn new(name: impl Into<String>, entries: impl IntoIterator<Item = TranscriptEntry>) -> Self {
        Self {
            name: name.into(),
            responses: entries.into_iter().map(|e| (e.image, e.response)).collect(),
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let entries: Vec<TranscriptEntry> = read_jsonl(path)?;
        Ok(Self::new(path.display().to_string(), entries))
    }
}

impl ModelClient for ReplayClient {
    fn generate(&self, image_ref: &str, _prompt: &str) -> Result<String, ClientError> {
        self.responses
            .get(image_ref)
            .cloned()
            .ok_or_else(|| ClientError::BadReply(format!("no recorded response for `{image_ref}`")))
    }

    fn endpoint(&self) -> String {
        format!("replay://{}", self.name)
    }
}
