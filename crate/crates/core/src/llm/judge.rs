//! External judge satisfying the classifier interface. Replies are parsed
//! for exactly one verdict label; an unparseable reply gets one re-ask with a
//! stricter instruction before failing hard.

use super::{ChatMessage, ChatRequest, LlmClient, LlmError};
use crate::classifier::{Classifier, ClassifyError};
use crate::game::{ConversationState, SerializeStyle, Verdict};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct JudgePrompt {
    pub case_context: String,
    pub transcript: String,
    pub instruction: String,
}

/// First case-insensitive label match in fixed precedence order:
/// Guilty → One, Innocent → Zero, Non-conclusive → Cont. Returns whether more
/// than one label was present (ambiguous reply).
pub fn parse_verdict_label(reply: &str) -> Result<(Verdict, bool), LlmError> {
    let lower = reply.to_lowercase();
    let guilty = lower.contains("guilty");
    let innocent = lower.contains("innocent");
    let non_conclusive = lower.contains("non-conclusive") || lower.contains("nonconclusive");
    let hits = [guilty, innocent, non_conclusive]
        .iter()
        .filter(|&&h| h)
        .count();
    let verdict = if guilty {
        Verdict::One
    } else if innocent {
        Verdict::Zero
    } else if non_conclusive {
        Verdict::Cont
    } else {
        return Err(LlmError::Parse(reply.to_string()));
    };
    Ok((verdict, hits > 1))
}

pub struct LlmJudge {
    client: Arc<LlmClient>,
    model_id: String,
    case_context: String,
    instruction: String,
    strict_instruction: String,
}

impl LlmJudge {
    pub fn new(
        client: Arc<LlmClient>,
        model_id: impl Into<String>,
        case_context: impl Into<String>,
        instruction: impl Into<String>,
        strict_instruction: impl Into<String>,
    ) -> LlmJudge {
        LlmJudge {
            client,
            model_id: model_id.into(),
            case_context: case_context.into(),
            instruction: instruction.into(),
            strict_instruction: strict_instruction.into(),
        }
    }

    pub fn prompt(&self, state: &ConversationState) -> JudgePrompt {
        JudgePrompt {
            case_context: self.case_context.clone(),
            transcript: state.serialize(SerializeStyle::SpeakerLabels),
            instruction: self.instruction.clone(),
        }
    }

    fn request(&self, prompt: &JudgePrompt, extra: Option<(&str, &str)>) -> ChatRequest {
        let mut messages = vec![
            ChatMessage::system(format!(
                "{}\n\nCase context:\n{}",
                prompt.instruction, prompt.case_context
            )),
            ChatMessage::user(format!("Conversation so far:\n{}", prompt.transcript)),
        ];
        if let Some((previous_reply, strict)) = extra {
            messages.push(ChatMessage::assistant(previous_reply));
            messages.push(ChatMessage::user(strict));
        }
        ChatRequest::new(self.model_id.clone(), messages)
    }
}

impl Classifier for LlmJudge {
    fn classify(&self, state: &ConversationState) -> Result<Verdict, ClassifyError> {
        if state.stages.is_empty() {
            return Err(ClassifyError::EmptyConversation);
        }
        let prompt = self.prompt(state);
        let first = self.request(&prompt, None);
        let (reply, id) = self
            .client
            .chat("judge", &first)
            .map_err(|e| ClassifyError::External(e.to_string()))?;
        match parse_verdict_label(&reply) {
            Ok((verdict, ambiguous)) => {
                if ambiguous {
                    self.client.audit().flag(id, "ambiguous_label");
                }
                Ok(verdict)
            }
            Err(_) => {
                self.client.audit().flag(id, "parse_failure");
                let reask = self.request(&prompt, Some((&reply, &self.strict_instruction)));
                let (second, id2) = self
                    .client
                    .chat("judge-reask", &reask)
                    .map_err(|e| ClassifyError::External(e.to_string()))?;
                match parse_verdict_label(&second) {
                    Ok((verdict, ambiguous)) => {
                        if ambiguous {
                            self.client.audit().flag(id2, "ambiguous_label");
                        }
                        Ok(verdict)
                    }
                    Err(e) => {
                        self.client.audit().flag(id2, "parse_failure");
                        Err(ClassifyError::External(e.to_string()))
                    }
                }
            }
        }
    }

    fn is_deterministic(&self) -> bool {
        self.client.is_deterministic()
    }
}

fn read_fixture(dir: &Path, name: &str) -> Result<String, LlmError> {
    let path = dir.join(name);
    std::fs::read_to_string(&path)
        .map(|s| s.trim_end().to_string())
        .map_err(|e| LlmError::Fixture(format!("{}: {e}", path.display())))
}

/// Assemble a judge from the prompt fixture directory (`case_context.txt`,
/// `judge_instruction.txt`, `judge_instruction_strict.txt`).
pub fn build_llm_judge(
    client: Arc<LlmClient>,
    model_id: &str,
    fixtures_dir: &Path,
) -> Result<LlmJudge, LlmError> {
    Ok(LlmJudge::new(
        client,
        model_id,
        read_fixture(fixtures_dir, "case_context.txt")?,
        read_fixture(fixtures_dir, "judge_instruction.txt")?,
        read_fixture(fixtures_dir, "judge_instruction_strict.txt")?,
    ))
}
