//! Free-text move source backed by a chat model playing a persona.

use super::{ChatMessage, ChatRequest, LlmClient};
use crate::agent::{AgentError, MoveContext, MoveGenerator};
use crate::game::{SerializeStyle, Token, Utterance};
use std::sync::Arc;

pub struct LlmPlayer {
    client: Arc<LlmClient>,
    model_id: String,
    persona: String,
}

impl LlmPlayer {
    pub fn new(
        client: Arc<LlmClient>,
        model_id: impl Into<String>,
        persona: impl Into<String>,
    ) -> LlmPlayer {
        LlmPlayer {
            client,
            model_id: model_id.into(),
            persona: persona.into(),
        }
    }

    pub fn client(&self) -> &LlmClient {
        &self.client
    }
}

/// Turn a raw model reply into a legal utterance: whitespace tokenization
/// with the reserved delimiter characters replaced, truncated at the length
/// cap. Returns the utterance and whether truncation happened.
pub fn sanitize_reply(reply: &str, max_len: usize) -> Option<(Utterance, bool)> {
    let mut tokens: Vec<Token> = reply
        .split_whitespace()
        .map(|w| w.replace(['#', '@'], "-"))
        .filter(|w| !w.is_empty())
        .map(|w| Token::new(w).expect("whitespace-free, non-empty"))
        .collect();
    let truncated = tokens.len() > max_len;
    tokens.truncate(max_len);
    Utterance::new(tokens).ok().map(|u| (u, truncated))
}

impl MoveGenerator for LlmPlayer {
    fn generate(&mut self, ctx: &MoveContext<'_>) -> Result<Utterance, AgentError> {
        let transcript = ctx.state.serialize(SerializeStyle::SpeakerLabels);
        let req = ChatRequest::new(
            self.model_id.clone(),
            vec![
                ChatMessage::system(self.persona.clone()),
                ChatMessage::user(format!(
                    "Conversation so far:\n{transcript}\n\nYou speak as {}. Reply with your next message only.",
                    ctx.mover
                )),
            ],
        );
        let (reply, id) = self
            .client
            .chat("player", &req)
            .map_err(|e| AgentError::Generator(e.to_string()))?;
        let (utterance, truncated) = sanitize_reply(&reply, ctx.spec.max_utterance_len)
            .ok_or_else(|| AgentError::Generator(format!("empty reply: {reply:?}")))?;
        if truncated {
            self.client.audit().flag(id, "truncated");
        }
        Ok(utterance)
    }

    fn is_deterministic(&self) -> bool {
        self.client.is_deterministic()
    }
}
