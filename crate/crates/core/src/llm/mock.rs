//! Deterministic chat backend fed by a fixture file. Lookup order: exact
//! request digest, then the text of the last message, then the default reply.

use super::{ChatBackend, ChatRequest, LlmError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockBackend {
    #[serde(default)]
    pub by_digest: BTreeMap<String, String>,
    #[serde(default)]
    pub by_last_message: BTreeMap<String, String>,
    #[serde(default)]
    pub default: Option<String>,
}

impl MockBackend {
    pub fn from_file(path: &Path) -> Result<MockBackend, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Fixture(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| LlmError::Fixture(format!("{}: {e}", path.display())))
    }

    pub fn with_default(reply: impl Into<String>) -> MockBackend {
        MockBackend {
            default: Some(reply.into()),
            ..MockBackend::default()
        }
    }
}

impl ChatBackend for MockBackend {
    fn chat(&self, req: &ChatRequest) -> Result<String, LlmError> {
        req.validate()?;
        if let Some(reply) = self.by_digest.get(&req.digest()) {
            return Ok(reply.clone());
        }
        let last = &req.messages.last().expect("validated non-empty").text;
        if let Some(reply) = self.by_last_message.get(last) {
            return Ok(reply.clone());
        }
        self.default.clone().ok_or_else(|| {
            LlmError::NoFixture(format!("digest {}, last message {last:?}", req.digest()))
        })
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}
