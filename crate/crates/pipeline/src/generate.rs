//! Few-shot prompting of a chat endpoint and per-sample evaluation.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sfcgen_core::datagen::Embedder;
use sfcgen_core::reduced::REDUCED_SCHEMA;
use sfcgen_core::safety::VerifyLimits;
use sfcgen_core::{CorpusItem, RetrievalIndex};
use thiserror::Error;

use crate::client::{ChatClient, ChatMessage, ChatRequest};
use crate::ladder::evaluate;
use crate::records::{Check, FailureClass, SampleRecord};

pub const DEFAULT_TEMPERATURE: f64 = 0.3;
pub const DEFAULT_FEW_SHOT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    /// Samples per prompt.
    pub samples: usize,
    pub few_shot: usize,
    pub constrained: bool,
    /// Extra requests allowed per failing sample; 0 is single-shot.
    pub max_retries: u32,
    pub limits: VerifyLimits,
    /// Prompts in flight at once.
    pub parallelism: usize,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            endpoint: String::new(),
            model: String::new(),
            temperature: DEFAULT_TEMPERATURE,
            samples: 1,
            few_shot: DEFAULT_FEW_SHOT,
            constrained: false,
            max_retries: 0,
            limits: VerifyLimits::default(),
            parallelism: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("temperature must be a finite number >= 0")]
    Temperature,
    #[error("samples per prompt must be at least 1")]
    Samples,
    #[error("parallelism must be at least 1")]
    Parallelism,
    #[error("no endpoint configured")]
    Endpoint,
    #[error("few-shot prompting needs a retrieval index")]
    MissingIndex,
    #[error("retrieval failed for prompt {prompt}: {message}")]
    Retrieval { prompt: String, message: String },
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(ConfigError::Temperature);
        }
        if self.samples == 0 {
            return Err(ConfigError::Samples);
        }
        if self.parallelism == 0 {
            return Err(ConfigError::Parallelism);
        }
        if self.endpoint.trim().is_empty() {
            return Err(ConfigError::Endpoint);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub id: String,
    pub prompt: String,
}

pub const INSTRUCTION: &str = "You write IEC 61131-3 sequential function charts in a reduced JSON form. \
Fields appear in this order. The document has pou_name, variables (input, output and local lists of \
{name, type, default}) and steps. Each step has name, initial, action (Structured Text or null), \
comment (or null) and children; each child edge has target, guard (a Structured Text boolean \
expression) and jump. Exactly one step is initial. Answer with the JSON document only.";

/// System instruction, retrieved examples as user/assistant pairs, then the prompt.
pub fn build_context(prompt: &str, examples: &[CorpusItem]) -> Vec<ChatMessage> {
    let mut m = vec![ChatMessage::new("system", INSTRUCTION)];
    for ex in examples {
        m.push(ChatMessage::new("user", ex.summary.clone()));
        m.push(ChatMessage::new("assistant", ex.document.clone()));
    }
    m.push(ChatMessage::new("user", prompt));
    m
}

fn retry_message(rec: &SampleRecord) -> String {
    format!(
        "The document failed validation ({}):\n{}\nReturn a corrected document.",
        rec.failure_class.map_or("unknown", FailureClass::as_str),
        rec.diagnostics.join("\n")
    )
}

/// Seed of one request; distinct per sample and per attempt.
fn request_seed(base: u64, sample: u32, attempt: u32) -> u64 {
    base.wrapping_add(u64::from(sample) << 16).wrapping_add(u64::from(attempt))
}

/// Draws and evaluates `cfg.samples` answers for one prompt. Transport
/// failures become failed samples.
pub fn generate_prompt(
    prompt: &Prompt,
    examples: &[CorpusItem],
    cfg: &GenerationConfig,
    client: &dyn ChatClient,
) -> Vec<SampleRecord> {
    let schema: Option<serde_json::Value> = cfg
        .constrained
        .then(|| serde_json::from_str(REDUCED_SCHEMA).expect("shipped schema is JSON"));
    let context = build_context(&prompt.prompt, examples);
    (0..cfg.samples as u32)
        .map(|sample| {
            let start = Instant::now();
            let mut messages = context.clone();
            let mut attempt = 0;
            loop {
                let req = ChatRequest {
                    model: cfg.model.clone(),
                    messages: messages.clone(),
                    temperature: cfg.temperature,
                    seed: request_seed(cfg.seed, sample, attempt),
                    response_schema: schema.clone(),
                };
                let mut rec = match client.complete(&req) {
                    Ok(text) => evaluate(&prompt.id, sample, &text, &cfg.limits, cfg.constrained),
                    Err(e) => SampleRecord {
                        prompt_id: prompt.id.clone(),
                        sample,
                        output: String::new(),
                        parse: Check::Fail,
                        st_syntax: None,
                        safety: None,
                        failure_class: Some(FailureClass::TransportError),
                        diagnostics: vec![e.to_string()],
                        attempts: 1,
                        latency_ms: 0,
                    },
                };
                attempt += 1;
                rec.attempts = attempt;
                let retryable = rec.failure_class.is_some_and(|c| c != FailureClass::TransportError);
                if !retryable || attempt > cfg.max_retries {
                    rec.latency_ms = start.elapsed().as_millis() as u64;
                    return rec;
                }
                messages.push(ChatMessage::new("assistant", rec.output.clone()));
                messages.push(ChatMessage::new("user", retry_message(&rec)));
            }
        })
        .collect()
}

/// Retrieves examples for every prompt, then generates prompts concurrently.
/// Configuration and retrieval problems abort before the first request.
/// `sink` sees each record as its prompt completes; the returned records
/// are in prompt order.
pub fn generate_all(
    prompts: &[Prompt],
    index: Option<(&RetrievalIndex, &(dyn Embedder<f32> + Sync))>,
    cfg: &GenerationConfig,
    client: &dyn ChatClient,
    sink: &(dyn Fn(&SampleRecord) + Sync),
) -> Result<Vec<SampleRecord>, ConfigError> {
    cfg.validate()?;
    let mut shots: Vec<Vec<CorpusItem>> = Vec::with_capacity(prompts.len());
    for p in prompts {
        if cfg.few_shot == 0 {
            shots.push(Vec::new());
            continue;
        }
        let (index, embedder) = index.ok_or(ConfigError::MissingIndex)?;
        let hits = index
            .retrieve(&p.prompt, cfg.few_shot, embedder)
            .map_err(|e| ConfigError::Retrieval {
                prompt: p.id.clone(),
                message: e.to_string(),
            })?;
        shots.push(hits.into_iter().map(|h| h.item.clone()).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .expect("thread pool");
    let per_prompt: Vec<Vec<SampleRecord>> = pool.install(|| {
        prompts
            .par_iter()
            .zip(shots.par_iter())
            .map(|(p, ex)| {
                let recs = generate_prompt(p, ex, cfg, client);
                recs.iter().for_each(sink);
                recs
            })
            .collect()
    });
    Ok(per_prompt.into_iter().flatten().collect())
}

/// Time budget for one HTTP request.
pub const REQUEST_TIMEOUT: Duration = Duration::from_secs(120);
