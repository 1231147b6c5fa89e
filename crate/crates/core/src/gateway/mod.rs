//! Chat-completion gateway.
//!
//! A [`Gateway`] wraps one [`ChatBackend`] (an OpenAI-compatible HTTP endpoint
//! or the deterministic [`ScriptedBackend`]) and owns the retry policy for
//! both transport failures and structured-output validation.

mod http;
mod scripted;
mod structured;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use http::HttpBackend;
pub use scripted::{ScriptEntry, ScriptedBackend};
pub use structured::{SchemaId, SchemaRegistry, StructuredError};

use crate::vocab::vocabulary;

vocabulary! {
    pub enum ChatRole {
        System => "system",
        User => "user",
        Assistant => "assistant",
    }
}

vocabulary! {
    /// Which agent issued a request. Not sent over the wire; the scripted
    /// backend keys its responses on it.
    pub enum AgentRole {
        Background => "BACKGROUND",
        Client => "CLIENT",
        Therapist => "THERAPIST",
        Supervisor => "SUPERVISOR",
        EuExtractor => "EU_EXTRACTOR",
        EaExtractor => "EA_EXTRACTOR",
        ItemGenerator => "ITEM_GENERATOR",
        Candidate => "CANDIDATE",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

/// Sampling parameters shared by all requests of one pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub model: String,
    pub temperature: f32,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            model: "gpt-oss-20b".to_string(),
            temperature: 0.7,
            max_tokens: 1024,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub agent: AgentRole,
    pub model_id: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f32,
    pub max_tokens: u32,
    pub seed: Option<u64>,
}

impl CompletionRequest {
    pub fn new(agent: AgentRole, params: &SamplingParams, messages: Vec<ChatMessage>) -> Self {
        Self {
            agent,
            model_id: params.model.clone(),
            messages,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            seed: params.seed,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let fail = |msg: &str| Err(GatewayError::Precondition(msg.to_string()));
        if self.messages.is_empty() {
            return fail("request has no messages");
        }
        if self.messages.iter().any(|m| m.content.trim().is_empty()) {
            return fail("message content is empty");
        }
        if self
            .messages
            .iter()
            .skip(1)
            .any(|m| m.role == ChatRole::System)
        {
            return fail("system message allowed only in first position");
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return fail("temperature must be within [0, 2]");
        }
        if self.max_tokens == 0 {
            return fail("max_tokens must be positive");
        }
        if self.model_id.trim().is_empty() {
            return fail("model id is empty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Http,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    pub base_url: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
    pub max_retries: u32,
    #[serde(with = "duration_millis")]
    pub retry_backoff: Duration,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Http,
            base_url: "http://localhost:8000/v1".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            timeout: Duration::from_secs(120),
            max_retries: 3,
            retry_backoff: Duration::from_millis(500),
            script: None,
        }
    }
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

mod duration_millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    Precondition(String),
    /// A single failed attempt that may succeed if retried.
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("transport failure after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: String },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("script exhausted: no response for ({role}, {index})")]
    ScriptExhausted { role: AgentRole, index: usize },
    #[error("script error: {0}")]
    Script(String),
}

impl GatewayError {
    pub fn is_transient(&self) -> bool {
        matches!(self, GatewayError::Transient(_))
    }

    /// Errors that indicate a misconfigured run rather than a flaky backend.
    /// Pipelines abort on these instead of discarding the current session.
    pub fn is_fatal(&self) -> bool {
        matches!(
            self,
            GatewayError::Auth(_)
                | GatewayError::MissingApiKey(_)
                | GatewayError::ScriptExhausted { .. }
                | GatewayError::Script(_)
                | GatewayError::Precondition(_)
        )
    }
}

/// Per-role call counters of a stateful backend, used to resume scripted
/// runs exactly.
pub type BackendCursor = BTreeMap<AgentRole, usize>;

/// One attempt against a model endpoint.
pub trait ChatBackend: Send + Sync {
    fn send(&self, request: &CompletionRequest) -> Result<String, GatewayError>;

    fn cursor(&self) -> Option<BackendCursor> {
        None
    }

    fn restore_cursor(&self, _cursor: &BackendCursor) -> Result<(), GatewayError> {
        Ok(())
    }
}

pub struct Gateway {
    backend: Box<dyn ChatBackend>,
    max_retries: u32,
    backoff: Duration,
    calls: AtomicUsize,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("max_retries", &self.max_retries)
            .field("calls", &self.calls())
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(backend: impl ChatBackend + 'static, max_retries: u32) -> Self {
        Self {
            backend: Box::new(backend),
            max_retries,
            backoff: Duration::ZERO,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn from_config(config: &BackendConfig) -> Result<Self, GatewayError> {
        match config.kind {
            BackendKind::Http => Ok(Gateway::new(HttpBackend::from_config(config)?, config.max_retries)
                .with_backoff(config.retry_backoff)),
            // Replayed failures need no wall-clock backoff.
            BackendKind::Scripted => {
                let path = config.script.as_ref().ok_or_else(|| {
                    GatewayError::Script("scripted backend requires a script path".into())
                })?;
                Ok(Gateway::new(ScriptedBackend::load(path)?, config.max_retries))
            }
        }
    }

    pub fn max_retries(&self) -> u32 {
        self.max_retries
    }

    /// Total backend attempts issued through this gateway.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn cursor(&self) -> Option<BackendCursor> {
        self.backend.cursor()
    }

    pub fn restore_cursor(&self, cursor: &BackendCursor) -> Result<(), GatewayError> {
        self.backend.restore_cursor(cursor)
    }

    fn attempt(&self, request: &CompletionRequest, attempt: u32) -> Result<String, GatewayError> {
        if attempt > 0 && !self.backoff.is_zero() {
            let factor = 1u32 << (attempt - 1).min(6);
            std::thread::sleep(self.backoff * factor);
        }
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.backend.send(request)
    }

    /// Returns the assistant content, retrying transient failures up to
    /// `max_retries` times.
    pub fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        request.validate()?;
        let mut attempt = 0;
        loop {
            match self.attempt(request, attempt) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_transient() => {
                    if attempt >= self.max_retries {
                        return Err(GatewayError::Transport {
                            attempts: attempt + 1,
                            last: e.to_string(),
                        });
                    }
                    tracing::debug!(agent = %request.agent, attempt, error = %e, "retrying");
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
