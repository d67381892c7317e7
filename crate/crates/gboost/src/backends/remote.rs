//! HTTP clients for logits-exposing model servers and remote PRMs.
//!
//! The wire protocol is deliberately logits-level: the fused decoding mode
//! needs raw logits, which mainstream completion APIs do not expose. All
//! bodies are UTF-8 JSON:
//!
//! * `POST {base_url}/v1/logits` — request `{"model": string, "token_ids": [int]}`,
//!   response `{"logits": [float]}` with array length == vocabulary size.
//! * `POST {base_url}/v1/reward` — request `{"question": string, "steps": [string]}`,
//!   response `{"score": float}`.
//! * Optional `Authorization: Bearer <token>` header.
//! * Errors: non-200 status with `{"error": {"code": string, "message": string}}`.
//!
//! 5xx responses and transport failures are retried with exponential backoff
//! up to `max_retries`; 4xx responses are permanent. Every retry is recorded
//! and observable through [`RemoteModelClient::retry_log`].

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::core::{LogitVector, Query, ReasoningStep, TokenId, Vocabulary};
use crate::error::{GBoostError, Result};
use crate::policy::GenerationBackend;
use crate::reward::{RewardModel, RewardScore};

pub const PROTOCOL_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitsRequest {
    pub model: String,
    pub token_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitsResponse {
    pub logits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRequest {
    pub question: String,
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardResponse {
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
}

/// One retry attempt, kept for trace inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryRecord {
    pub attempt: u32,
    pub reason: String,
}

struct HttpEndpoint {
    base_url: String,
    timeout: Duration,
    max_retries: u32,
    auth_token: Option<String>,
    backoff_base: Duration,
    client: reqwest::blocking::Client,
    retry_log: Mutex<Vec<RetryRecord>>,
}

impl HttpEndpoint {
    fn new(base_url: String, timeout: Duration, max_retries: u32, auth_token: Option<String>) -> Self {
        Self {
            base_url,
            timeout,
            max_retries,
            auth_token,
            backoff_base: Duration::from_millis(50),
            client: reqwest::blocking::Client::new(),
            retry_log: Mutex::new(Vec::new()),
        }
    }

    fn record_retry(&self, attempt: u32, reason: String) {
        self.retry_log.lock().unwrap().push(RetryRecord { attempt, reason });
    }

    fn post_json<Req: Serialize, Resp: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        req: &Req,
    ) -> Result<Resp> {
        let url = format!("{}/{}/{}", self.base_url.trim_end_matches('/'), PROTOCOL_VERSION, path);
        let mut attempt = 0u32;
        loop {
            let mut builder = self.client.post(&url).timeout(self.timeout).json(req);
            if let Some(token) = &self.auth_token {
                builder = builder.bearer_auth(token);
            }
            let outcome = builder.send();
            let retryable_reason = match outcome {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let text = resp.text().map_err(|e| GBoostError::Protocol(e.to_string()))?;
                        return serde_json::from_str(&text).map_err(|e| {
                            GBoostError::Protocol(format!("malformed response body: {e}"))
                        });
                    }
                    let body = resp.text().unwrap_or_default();
                    let message = serde_json::from_str::<ErrorBody>(&body)
                        .map(|b| format!("{}: {}", b.error.code, b.error.message))
                        .unwrap_or(body);
                    if status.is_client_error() {
                        return Err(GBoostError::Request { status: status.as_u16(), message });
                    }
                    format!("status {status}: {message}")
                }
                Err(e) => format!("transport: {e}"),
            };
            if attempt >= self.max_retries {
                return Err(GBoostError::Transport {
                    attempts: attempt + 1,
                    message: retryable_reason,
                });
            }
            self.record_retry(attempt + 1, retryable_reason);
            std::thread::sleep(self.backoff_base * 2u32.pow(attempt));
            attempt += 1;
        }
    }
}

/// Client for a remote model exposing next-token logits.
pub struct RemoteModelClient {
    endpoint: HttpEndpoint,
    model_id: String,
    vocabulary: Vocabulary,
}

impl RemoteModelClient {
    pub fn new(
        base_url: impl Into<String>,
        model_id: impl Into<String>,
        vocabulary: Vocabulary,
        timeout: Duration,
        max_retries: u32,
        auth_token: Option<String>,
    ) -> Self {
        Self {
            endpoint: HttpEndpoint::new(base_url.into(), timeout, max_retries, auth_token),
            model_id: model_id.into(),
            vocabulary,
        }
    }

    /// Shrink the backoff base; test stubs don't need real waits.
    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.endpoint.backoff_base = base;
        self
    }

    pub fn retry_log(&self) -> Vec<RetryRecord> {
        self.endpoint.retry_log.lock().unwrap().clone()
    }
}

impl GenerationBackend for RemoteModelClient {
    fn next_logits(&self, context: &[TokenId]) -> Result<LogitVector> {
        if context.is_empty() {
            return Err(GBoostError::InvalidInput("empty context".into()));
        }
        let req = LogitsRequest {
            model: self.model_id.clone(),
            token_ids: context.iter().map(|t| t.0).collect(),
        };
        let resp: LogitsResponse = self.endpoint.post_json("logits", &req)?;
        if resp.logits.len() != self.vocabulary.size {
            return Err(GBoostError::Protocol(format!(
                "logits length {} does not match vocabulary size {}",
                resp.logits.len(),
                self.vocabulary.size
            )));
        }
        LogitVector::new(resp.logits)
    }

    fn vocabulary(&self) -> Vocabulary {
        self.vocabulary.clone()
    }

    fn id(&self) -> &str {
        &self.model_id
    }
}

/// Client for a remote process reward model.
pub struct RemotePRMClient {
    endpoint: HttpEndpoint,
    name: String,
}

impl RemotePRMClient {
    pub fn new(
        base_url: impl Into<String>,
        timeout: Duration,
        max_retries: u32,
        auth_token: Option<String>,
    ) -> Self {
        Self {
            endpoint: HttpEndpoint::new(base_url.into(), timeout, max_retries, auth_token),
            name: "remote-prm".to_string(),
        }
    }

    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.endpoint.backoff_base = base;
        self
    }

    pub fn retry_log(&self) -> Vec<RetryRecord> {
        self.endpoint.retry_log.lock().unwrap().clone()
    }
}

fn render_tokens(tokens: &[TokenId]) -> String {
    tokens.iter().map(|t| t.0.to_string()).collect::<Vec<_>>().join(" ")
}

impl RewardModel for RemotePRMClient {
    fn score(&self, query: &Query, steps: &[ReasoningStep]) -> Result<RewardScore> {
        if steps.is_empty() {
            return Err(GBoostError::InvalidInput("reward model needs at least one step".into()));
        }
        let req = RewardRequest {
            question: query.text.clone().unwrap_or_else(|| render_tokens(&query.token_ids)),
            steps: steps.iter().map(|s| render_tokens(&s.token_ids)).collect(),
        };
        let resp: RewardResponse = self.endpoint.post_json("reward", &req)?;
        if !resp.score.is_finite() {
            return Err(GBoostError::Protocol("non-finite reward score".into()));
        }
        Ok(RewardScore::from_raw(resp.score))
    }

    fn id(&self) -> &str {
        &self.name
    }
}
