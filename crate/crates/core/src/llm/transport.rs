//! Chat-completion transport: the wire protocol and nothing else.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LlmError, PromptRequest};

pub const ENDPOINT_ENV: &str = "KGBENCH_LLM_ENDPOINT";
pub const API_KEY_ENV: &str = "KGBENCH_LLM_API_KEY";
pub const MODEL_ENV: &str = "KGBENCH_LLM_MODEL";

/// One transport failure, classified for the retry loop.
#[derive(Debug)]
pub enum TransportFault {
    /// HTTP 429; retriable with backoff.
    RateLimited,
    /// Network trouble or a 5xx; worth another attempt.
    Retriable(String),
    /// Anything else (bad credentials, bad request); retrying cannot help.
    Fatal(String),
}

pub trait Transport: Sync {
    fn complete(&self, request: &PromptRequest) -> Result<String, TransportFault>;
}

/// Transport for cache-only runs: every actual call fails, so generation
/// succeeds exactly as far as the transcript reaches.
#[derive(Debug, Default, Clone)]
pub struct OfflineTransport;

impl Transport for OfflineTransport {
    fn complete(&self, request: &PromptRequest) -> Result<String, TransportFault> {
        Err(TransportFault::Fatal(format!(
            "request {} not in transcript and no endpoint configured",
            request.request_id
        )))
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: Vec<ChatMessage<'a>>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: Option<String>,
}

/// HTTP client for any chat-completions endpoint.
pub struct HttpTransport {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> HttpTransport {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .new_agent();
        HttpTransport { agent, endpoint: endpoint.into(), api_key }
    }

    /// Reads the endpoint URL (required) and API key (optional) from the
    /// environment.
    pub fn from_env() -> Result<HttpTransport, LlmError> {
        let endpoint = std::env::var(ENDPOINT_ENV).map_err(|_| {
            LlmError::Configuration(format!("set {ENDPOINT_ENV} to a chat-completions URL"))
        })?;
        Ok(HttpTransport::new(endpoint, std::env::var(API_KEY_ENV).ok()))
    }
}

impl Transport for HttpTransport {
    fn complete(&self, request: &PromptRequest) -> Result<String, TransportFault> {
        let body = ChatRequest {
            model: &request.model_name,
            temperature: request.temperature(),
            messages: vec![ChatMessage { role: "user", content: &request.prompt }],
        };
        let mut builder = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            builder = builder.header("authorization", format!("Bearer {key}"));
        }
        let mut response = builder.send_json(&body).map_err(classify)?;
        let parsed: ChatResponse = response.body_mut().read_json().map_err(classify)?;
        Ok(parsed
            .choices
            .into_iter()
            .next()
            .and_then(|choice| choice.message.content)
            .unwrap_or_default())
    }
}

fn classify(error: ureq::Error) -> TransportFault {
    match error {
        ureq::Error::StatusCode(429) => TransportFault::RateLimited,
        ureq::Error::StatusCode(code) if code >= 500 => {
            TransportFault::Retriable(format!("HTTP {code}"))
        }
        ureq::Error::StatusCode(code) => TransportFault::Fatal(format!("HTTP {code}")),
        ureq::Error::Io(e) => TransportFault::Retriable(format!("io: {e}")),
        ureq::Error::Timeout(t) => TransportFault::Retriable(format!("timeout: {t}")),
        ureq::Error::HostNotFound => TransportFault::Retriable("host not found".into()),
        other => TransportFault::Fatal(other.to_string()),
    }
}
