//! Chat-completions client for a served vision-language model.

use std::path::Path;
use std::time::Duration;

use base64::Engine;
use fsukit::distill::ModelClient;
use fsukit::error::ClientError;
use serde_json::{json, Value};

pub struct HttpModelClient {
    url: String,
    model: String,
    token: Option<String>,
    http: reqwest::blocking::Client,
}

impl HttpModelClient {
    pub fn new(url: impl Into<String>, model: impl Into<String>, token: Option<String>, timeout: Duration) -> anyhow::Result<Self> {
        let http = reqwest::blocking::Client::builder().timeout(timeout).build()?;
        Ok(Self {
            url: url.into(),
            model: model.into(),
            token,
            http,
        })
    }

    /// Request body. Local image files are inlined as data URLs; any other
    /// reference is passed through as a URL.
    pub fn request_body(&self, image_ref: &str, prompt: &str) -> Value {
        json!({
            "model": self.model,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "image_url", "image_url": {"url": image_url(image_ref)}},
                    {"type": "text", "text": prompt},
                ],
            }],
        })
    }
}

fn image_url(image_ref: &str) -> String {
    let path = Path::new(image_ref);
    let mime = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("webp") => "image/webp",
        Some("gif") => "image/gif",
        _ => return image_ref.to_string(),
    };
    match std::fs::read(path) {
        Ok(bytes) => format!(
            "data:{mime};base64,{}",
            base64::engine::general_purpose::STANDARD.encode(bytes)
        ),
        Err(_) => image_ref.to_string(),
    }
}

fn transport(e: reqwest::Error) -> ClientError {
    if e.is_timeout() {
        ClientError::Timeout
    } else {
        ClientError::Transport(e.to_string())
    }
}

impl ModelClient for HttpModelClient {
    fn generate(&self, image_ref: &str, prompt: &str) -> Result<String, ClientError> {
        let mut req = self.http.post(&self.url).json(&self.request_body(image_ref, prompt));
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(transport)?;
        let status = resp.status();
        let body = resp.text().map_err(transport)?;
        if !status.is_success() {
            return Err(ClientError::Status {
                status: status.as_u16(),
                body,
            });
        }
        let value: Value = serde_json::from_str(&body).map_err(|e| ClientError::BadReply(e.to_string()))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ClientError::BadReply("no choices[0].message.content".into()))
    }

    fn endpoint(&self) -> String {
        self.url.clone()
    }
}
