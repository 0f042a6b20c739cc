//! Chat-completions HTTP backend. Bearer credential comes from the
//! `VERDICT_LLM_API_KEY` environment variable.

use super::{ChatBackend, ChatRequest, LlmError};
use serde::Deserialize;

pub const API_KEY_ENV: &str = "VERDICT_LLM_API_KEY";

pub struct HttpBackend {
    base_url: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    /// `base_url` is the service root; requests go to
    /// `{base_url}/chat/completions`.
    pub fn new(base_url: impl Into<String>) -> Result<HttpBackend, LlmError> {
        let api_key = std::env::var(API_KEY_ENV).map_err(|_| LlmError::Auth)?;
        Ok(HttpBackend {
            base_url: base_url.into(),
            api_key,
            client: reqwest::blocking::Client::new(),
        })
    }

    #[cfg(test)]
    fn with_key(base_url: impl Into<String>, api_key: impl Into<String>) -> HttpBackend {
        HttpBackend {
            base_url: base_url.into(),
            api_key: api_key.into(),
            client: reqwest::blocking::Client::new(),
        }
    }
}

#[derive(Deserialize)]
struct ChatCompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

impl ChatBackend for HttpBackend {
    fn chat(&self, req: &ChatRequest) -> Result<String, LlmError> {
        req.validate()?;
        let body = serde_json::json!({
            "model": req.model_id,
            "messages": req.messages.iter().map(|m| serde_json::json!({
                "role": m.role,
                "content": m.text,
            })).collect::<Vec<_>>(),
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        });
        let response = self
            .client
            .post(format!("{}/chat/completions", self.base_url))
            .bearer_auth(&self.api_key)
            .timeout(req.timeout)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    LlmError::Timeout
                } else {
                    LlmError::Transport(e.to_string())
                }
            })?;
        match response.status().as_u16() {
            200 => {
                let parsed: ChatCompletionResponse = response
                    .json()
                    .map_err(|e| LlmError::Transport(format!("malformed response: {e}")))?;
                parsed
                    .choices
                    .into_iter()
                    .next()
                    .map(|c| c.message.content)
                    .ok_or_else(|| LlmError::Transport("response has no choices".into()))
            }
            401 | 403 => Err(LlmError::Auth),
            429 => Err(LlmError::RateLimited),
            status => Err(LlmError::Transport(format!("http status {status}"))),
        }
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ChatMessage;

    #[test]
    fn missing_api_key_is_an_auth_error() {
        // run with the env var absent in the test environment
        if std::env::var(API_KEY_ENV).is_ok() {
            return;
        }
        assert!(matches!(
            HttpBackend::new("http://localhost:1"),
            Err(LlmError::Auth)
        ));
    }

    #[test]
    fn unreachable_endpoint_is_a_transport_error() {
        let backend = HttpBackend::with_key("http://127.0.0.1:1", "k");
        let req = ChatRequest::new("m", vec![ChatMessage::user("hi")]);
        assert!(matches!(
            backend.chat(&req),
            Err(LlmError::Transport(_)) | Err(LlmError::Timeout)
        ));
    }
}
