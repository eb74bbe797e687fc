//! Chat-completions and embeddings over HTTP.
//!
//! Requests use the widely deployed OpenAI-style JSON shapes. One request
//! is sent per sample so every sample carries its own seed.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sfcgen_core::datagen::{Embedder, EmbedderError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: &str, content: impl Into<String>) -> Self {
        ChatMessage {
            role: role.to_string(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub seed: u64,
    /// JSON schema the answer must follow, sent as a structured-output
    /// response format.
    pub response_schema: Option<Value>,
}

impl ChatRequest {
    pub fn body(&self) -> Value {
        let mut body = json!({
            "model": self.model,
            "messages": self.messages,
            "temperature": self.temperature,
            "seed": self.seed,
        });
        if let Some(schema) = &self.response_schema {
            body["response_format"] = json!({
                "type": "json_schema",
                "json_schema": { "name": "reduced_sfc", "schema": schema },
            });
        }
        body
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("endpoint answered {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unexpected response: {0}")]
    Malformed(String),
}

pub trait ChatClient: Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError>;
}

fn http(timeout: Duration) -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .expect("TLS backend initializes")
}

fn post(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: Option<&str>,
    body: &Value,
) -> Result<Value, ClientError> {
    let mut req = client.post(url).json(body);
    if let Some(key) = api_key {
        req = req.bearer_auth(key);
    }
    let resp = req.send()?;
    let status = resp.status();
    let text = resp.text()?;
    if !status.is_success() {
        return Err(ClientError::Status {
            status: status.as_u16(),
            body: text.chars().take(500).collect(),
        });
    }
    serde_json::from_str(&text).map_err(|e| ClientError::Malformed(e.to_string()))
}

pub struct HttpChatClient {
    url: String,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl HttpChatClient {
    /// `url` is the full chat-completions URL.
    pub fn new(url: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        HttpChatClient {
            url: url.into(),
            api_key,
            http: http(timeout),
        }
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError> {
        let v = post(&self.http, &self.url, self.api_key.as_deref(), &request.body())?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ClientError::Malformed("no choices[0].message.content".into()))
    }
}

/// Embeddings endpoint taking `{model, input}` and answering
/// `{data: [{embedding: [...]}]}`.
pub struct HttpEmbedder {
    url: String,
    model: String,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl HttpEmbedder {
    pub fn new(url: impl Into<String>, model: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        HttpEmbedder {
            url: url.into(),
            model: model.into(),
            api_key,
            http: http(timeout),
        }
    }
}

impl Embedder<f32> for HttpEmbedder {
    fn id(&self) -> String {
        format!("http:{}", self.model)
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>, EmbedderError> {
        let body = json!({ "model": self.model, "input": text });
        let v = post(&self.http, &self.url, self.api_key.as_deref(), &body)
            .map_err(|e| EmbedderError::Service(e.to_string()))?;
        let values = v
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| EmbedderError::Service("no data[0].embedding".into()))?;
        values
            .iter()
            .map(|x| {
                x.as_f64()
                    .map(|f| f as f32)
                    .filter(|f| f.is_finite())
                    .ok_or(EmbedderError::NotFinite)
            })
            .collect()
    }
}
