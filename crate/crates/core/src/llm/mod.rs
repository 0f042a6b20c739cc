//! External language-model bridge: a chat client with retries, rate limiting
//! and an audit trail, a deterministic file-backed mock, a judge that
//! satisfies the classifier interface, and a free-text move generator.

mod audit;
mod http;
mod judge;
mod mock;
mod player;

pub use audit::{AuditLog, CallOutcome, CallRecord};
pub use http::HttpBackend;
pub use judge::{build_llm_judge, parse_verdict_label, JudgePrompt, LlmJudge};
pub use mock::MockBackend;
pub use player::{sanitize_reply, LlmPlayer};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid chat request: {0}")]
    InvalidRequest(String),
    #[error("authentication failed")]
    Auth,
    #[error("request timed out")]
    Timeout,
    #[error("rate limited")]
    RateLimited,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no mock fixture for request: {0}")]
    NoFixture(String),
    #[error("unparseable judge reply: {0:?}")]
    Parse(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}

impl LlmError {
    fn is_retryable(&self) -> bool {
        matches!(
            self,
            LlmError::Timeout | LlmError::RateLimited | LlmError::Transport(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub text: String,
}

impl ChatMessage {
    pub fn system(text: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "system".into(),
            text: text.into(),
        }
    }

    pub fn user(text: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "user".into(),
            text: text.into(),
        }
    }

    pub fn assistant(text: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "assistant".into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub timeout: Duration,
}

impl ChatRequest {
    pub fn new(model_id: impl Into<String>, messages: Vec<ChatMessage>) -> ChatRequest {
        ChatRequest {
            model_id: model_id.into(),
            messages,
            temperature: 0.0,
            max_output_tokens: 256,
            timeout: Duration::from_secs(30),
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.messages.is_empty() {
            return Err(LlmError::InvalidRequest("messages must be non-empty".into()));
        }
        if self.timeout.is_zero() {
            return Err(LlmError::InvalidRequest("timeout must be positive".into()));
        }
        Ok(())
    }

    /// Content digest used to key mock fixtures: sha256 over the model id and
    /// the (role, text) sequence. Sampling knobs and timeout are excluded so
    /// fixtures survive tuning.
    pub fn digest(&self) -> String {
        let canonical = serde_json::json!({
            "model": self.model_id,
            "messages": self.messages,
        });
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&canonical).expect("serializable"));
        hex(&hasher.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One raw chat attempt against a concrete backend. Retries, limits and
/// auditing live in [`LlmClient`].
pub trait ChatBackend: Send + Sync {
    fn chat(&self, req: &ChatRequest) -> Result<String, LlmError>;
    fn is_deterministic(&self) -> bool;
}

#[derive(Debug, Clone, Copy)]
pub struct ClientLimits {
    pub max_in_flight: usize,
    /// Token-bucket rate; `None` disables rate limiting.
    pub requests_per_sec: Option<f64>,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl Default for ClientLimits {
    fn default() -> ClientLimits {
        ClientLimits {
            max_in_flight: 4,
            requests_per_sec: None,
            max_attempts: 3,
            initial_backoff: Duration::from_millis(250),
            max_backoff: Duration::from_secs(2),
        }
    }
}

struct BucketState {
    in_flight: usize,
    tokens: f64,
    last_refill: Instant,
}

/// In-flight cap plus token-bucket rate limiting.
struct Limiter {
    limits: ClientLimits,
    state: Mutex<BucketState>,
    cv: Condvar,
}

impl Limiter {
    fn new(limits: ClientLimits) -> Limiter {
        Limiter {
            limits,
            state: Mutex::new(BucketState {
                in_flight: 0,
                tokens: limits.requests_per_sec.unwrap_or(0.0).max(1.0),
                last_refill: Instant::now(),
            }),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut state = self.state.lock().unwrap();
        loop {
            if let Some(rate) = self.limits.requests_per_sec {
                let now = Instant::now();
                let burst = rate.max(1.0);
                state.tokens = (state.tokens
                    + now.duration_since(state.last_refill).as_secs_f64() * rate)
                    .min(burst);
                state.last_refill = now;
                if state.in_flight < self.limits.max_in_flight && state.tokens >= 1.0 {
                    state.tokens -= 1.0;
                    state.in_flight += 1;
                    return;
                }
                let wait = Duration::from_secs_f64(((1.0 - state.tokens) / rate).max(0.001));
                let (s, _) = self.cv.wait_timeout(state, wait).unwrap();
                state = s;
            } else {
                if state.in_flight < self.limits.max_in_flight {
                    state.in_flight += 1;
                    return;
                }
                state = self.cv.wait(state).unwrap();
            }
        }
    }

    fn release(&self) {
        self.state.lock().unwrap().in_flight -= 1;
        self.cv.notify_one();
    }
}

/// Chat client wrapping any backend with retries (capped exponential
/// backoff), concurrency/rate limits, correlation ids and audit records.
pub struct LlmClient {
    backend: Arc<dyn ChatBackend>,
    limiter: Limiter,
    audit: AuditLog,
    next_correlation: AtomicU64,
}

impl LlmClient {
    pub fn new(backend: Arc<dyn ChatBackend>, limits: ClientLimits, audit: AuditLog) -> LlmClient {
        LlmClient {
            backend,
            limiter: Limiter::new(limits),
            audit,
            next_correlation: AtomicU64::new(1),
        }
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    pub fn is_deterministic(&self) -> bool {
        self.backend.is_deterministic()
    }

    /// Send a request; returns the reply text and the correlation id of the
    /// audit record.
    pub fn chat(&self, kind: &str, req: &ChatRequest) -> Result<(String, u64), LlmError> {
        req.validate()?;
        let correlation_id = self.next_correlation.fetch_add(1, Ordering::Relaxed);
        self.limiter.acquire();
        let mut attempts = 0;
        let mut backoff = self.limiter.limits.initial_backoff;
        let result = loop {
            attempts += 1;
            match self.backend.chat(req) {
                Ok(text) => break Ok(text),
                Err(e) if e.is_retryable() && attempts < self.limiter.limits.max_attempts => {
                    std::thread::sleep(backoff);
                    backoff = (backoff * 2).min(self.limiter.limits.max_backoff);
                }
                Err(e) => break Err(e),
            }
        };
        self.limiter.release();
        let outcome = match &result {
            Ok(_) => CallOutcome::Ok,
            Err(e) => CallOutcome::Failed(e.to_string()),
        };
        self.audit.record(CallRecord {
            correlation_id,
            kind: kind.to_string(),
            attempts,
            outcome,
            flags: Vec::new(),
        });
        result.map(|text| (text, correlation_id))
    }
}
