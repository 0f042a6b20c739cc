//! Conversation states and their two serialized forms.

use super::{GameError, GameSpec, Token, Utterance, Verdict};
use serde::{Deserialize, Serialize};

/// One completed stage: an X utterance followed by Y's reply.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stage {
    pub x_move: Utterance,
    pub y_move: Utterance,
}

/// The conversation string `s_t`, kept structured: the seed text `s_0`,
/// the completed stages, one verdict per completed stage, and (between X's
/// move and Y's reply) the pending X utterance of the stage in progress.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConversationState {
    pub seed: Vec<Token>,
    pub stages: Vec<Stage>,
    pub verdict_history: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending_x: Option<Utterance>,
}

/// The move content of a state, without verdicts. This is exactly what the
/// serialized string encodes, so parsing round-trips through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub seed: Vec<Token>,
    pub stages: Vec<Stage>,
    pub pending_x: Option<Utterance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SerializeStyle {
    /// `s_0 + "#" + x + "@" + y` per stage.
    Delimiters,
    /// One `"X: ..."` / `"Y: ..."` line per utterance.
    SpeakerLabels,
}

impl ConversationState {
    pub fn new(seed: Vec<Token>) -> ConversationState {
        ConversationState {
            seed,
            stages: Vec::new(),
            verdict_history: Vec::new(),
            pending_x: None,
        }
    }

    pub fn empty() -> ConversationState {
        ConversationState::new(Vec::new())
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Terminal iff the last verdict is conclusive or the stage cap is hit.
    pub fn is_terminal(&self, spec: &GameSpec) -> bool {
        self.last_verdict().map_or(false, Verdict::is_conclusive)
            || self.stages.len() >= spec.max_stages
    }

    /// The verdict the game ends with, if the state is terminal. A game that
    /// exhausts the stage cap without a conclusive verdict ends with `Cont`.
    pub fn terminal_verdict(&self, spec: &GameSpec) -> Option<Verdict> {
        match self.last_verdict() {
            Some(v) if v.is_conclusive() => Some(v),
            _ if self.stages.len() >= spec.max_stages => Some(Verdict::Cont),
            _ => None,
        }
    }

    pub fn last_verdict(&self) -> Option<Verdict> {
        self.verdict_history.last().copied()
    }

    /// A copy of this state with X's move of the current stage recorded but
    /// not yet answered. Y's legal moves are keyed on this pending utterance.
    pub fn with_pending_x(&self, x_move: Utterance) -> Result<ConversationState, GameError> {
        if self.pending_x.is_some() {
            return Err(GameError::OutOfTurn(
                "X has already moved in the current stage".into(),
            ));
        }
        let mut next = self.clone();
        next.pending_x = Some(x_move);
        Ok(next)
    }

    pub fn transcript(&self) -> Transcript {
        Transcript {
            seed: self.seed.clone(),
            stages: self.stages.clone(),
            pending_x: self.pending_x.clone(),
        }
    }

    pub fn serialize(&self, style: SerializeStyle) -> String {
        serialize_parts(&self.seed, &self.stages, self.pending_x.as_ref(), style)
    }
}

impl Transcript {
    pub fn serialize(&self, style: SerializeStyle) -> String {
        serialize_parts(&self.seed, &self.stages, self.pending_x.as_ref(), style)
    }

    /// Rebuild a full state by re-running a verdict per stage prefix.
    /// The engine invariant (every verdict before the last is `Cont`) is not
    /// imposed here; callers validating foreign transcripts check it.
    pub fn into_state(self, verdicts: Vec<Verdict>) -> Result<ConversationState, GameError> {
        if verdicts.len() != self.stages.len() {
            return Err(GameError::Parse(format!(
                "{} verdicts for {} stages",
                verdicts.len(),
                self.stages.len()
            )));
        }
        Ok(ConversationState {
            seed: self.seed,
            stages: self.stages,
            verdict_history: verdicts,
            pending_x: self.pending_x,
        })
    }
}

fn serialize_parts(
    seed: &[Token],
    stages: &[Stage],
    pending: Option<&Utterance>,
    style: SerializeStyle,
) -> String {
    match style {
        SerializeStyle::Delimiters => {
            let mut out = seed
                .iter()
                .map(Token::as_str)
                .collect::<Vec<_>>()
                .join(" ");
            for stage in stages {
                out.push('#');
                out.push_str(&stage.x_move.text());
                out.push('@');
                out.push_str(&stage.y_move.text());
            }
            if let Some(x) = pending {
                out.push('#');
                out.push_str(&x.text());
            }
            out
        }
        SerializeStyle::SpeakerLabels => {
            let mut lines = Vec::new();
            if !seed.is_empty() {
                lines.push(format!(
                    "S: {}",
                    seed.iter().map(Token::as_str).collect::<Vec<_>>().join(" ")
                ));
            }
            for stage in stages {
                lines.push(format!("X: {}", stage.x_move.text()));
                lines.push(format!("Y: {}", stage.y_move.text()));
            }
            if let Some(x) = pending {
                lines.push(format!("X: {}", x.text()));
            }
            lines.join("\n")
        }
    }
}

/// Inverse of [`ConversationState::serialize`] on the move content.
pub fn parse_transcript(text: &str, style: SerializeStyle) -> Result<Transcript, GameError> {
    match style {
        SerializeStyle::Delimiters => parse_delimiters(text),
        SerializeStyle::SpeakerLabels => parse_speaker_labels(text),
    }
}

fn parse_seed(text: &str) -> Result<Vec<Token>, GameError> {
    text.split_whitespace().map(Token::new).collect()
}

fn parse_delimiters(text: &str) -> Result<Transcript, GameError> {
    let mut segments = text.split('#');
    let seed = parse_seed(segments.next().unwrap_or(""))?;
    let mut stages = Vec::new();
    let mut pending_x = None;
    for segment in segments {
        if pending_x.is_some() {
            return Err(GameError::Parse(
                "'#' found while an X move was still unanswered".into(),
            ));
        }
        match segment.split_once('@') {
            Some((x, y)) => {
                if y.contains('@') {
                    return Err(GameError::Parse("multiple '@' in one stage".into()));
                }
                stages.push(Stage {
                    x_move: Utterance::parse(x)?,
                    y_move: Utterance::parse(y)?,
                });
            }
            None => pending_x = Some(Utterance::parse(segment)?),
        }
    }
    Ok(Transcript {
        seed,
        stages,
        pending_x,
    })
}

fn parse_speaker_labels(text: &str) -> Result<Transcript, GameError> {
    let mut seed = Vec::new();
    let mut stages = Vec::new();
    let mut pending_x: Option<Utterance> = None;
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| GameError::Parse(format!("line {}: {}", i + 1, msg));
        if let Some(rest) = line.strip_prefix("S: ") {
            if i != 0 {
                return Err(err("seed line only allowed first"));
            }
            seed = parse_seed(rest)?;
        } else if let Some(rest) = line.strip_prefix("X: ") {
            if pending_x.is_some() {
                return Err(err("X line while an X move was still unanswered"));
            }
            pending_x = Some(Utterance::parse(rest)?);
        } else if let Some(rest) = line.strip_prefix("Y: ") {
            let x_move = pending_x.take().ok_or_else(|| err("Y line before X"))?;
            stages.push(Stage {
                x_move,
                y_move: Utterance::parse(rest)?,
            });
        } else {
            return Err(err("expected 'S: ', 'X: ' or 'Y: ' prefix"));
        }
    }
    Ok(Transcript {
        seed,
        stages,
        pending_x,
    })
}

#[cfg(test)]
mod tests {
    use super::super::utt;
    use super::*;

    fn one_stage_state() -> ConversationState {
        let mut s = ConversationState::empty();
        s.stages.push(Stage {
            x_move: utt(["a"]),
            y_move: utt(["b"]),
        });
        s.verdict_history.push(Verdict::Cont);
        s
    }

    #[test]
    fn empty_state_serializes_to_empty_string() {
        let s = ConversationState::empty();
        assert_eq!(s.serialize(SerializeStyle::Delimiters), "");
        assert_eq!(s.serialize(SerializeStyle::SpeakerLabels), "");
    }

    #[test]
    fn one_stage_delimiters() {
        assert_eq!(one_stage_state().serialize(SerializeStyle::Delimiters), "#a@b");
    }

    #[test]
    fn one_stage_speaker_labels() {
        assert_eq!(
            one_stage_state().serialize(SerializeStyle::SpeakerLabels),
            "X: a\nY: b"
        );
    }

    #[test]
    fn seed_and_pending_serialize() {
        let mut s = one_stage_state();
        s.seed = vec![Token::new("s0").unwrap()];
        s.pending_x = Some(utt(["q", "r"]));
        assert_eq!(s.serialize(SerializeStyle::Delimiters), "s0#a@b#q r");
        assert_eq!(
            s.serialize(SerializeStyle::SpeakerLabels),
            "S: s0\nX: a\nY: b\nX: q r"
        );
    }

    #[test]
    fn parse_round_trips_both_styles() {
        let mut s = one_stage_state();
        s.seed = vec![Token::new("s0").unwrap()];
        s.stages.push(Stage {
            x_move: utt(["c", "d"]),
            y_move: utt(["e"]),
        });
        s.verdict_history.push(Verdict::One);
        for style in [SerializeStyle::Delimiters, SerializeStyle::SpeakerLabels] {
            let text = s.serialize(style);
            let parsed = parse_transcript(&text, style).unwrap();
            assert_eq!(parsed, s.transcript());
            assert_eq!(parsed.serialize(style), text);
        }
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_transcript("#a@b#c#d", SerializeStyle::Delimiters).is_err());
        assert!(parse_transcript("#a@b@c", SerializeStyle::Delimiters).is_err());
        assert!(parse_transcript("Z: hello", SerializeStyle::SpeakerLabels).is_err());
        assert!(parse_transcript("Y: b", SerializeStyle::SpeakerLabels).is_err());
    }

    #[test]
    fn pending_x_guard() {
        let s = one_stage_state();
        let p = s.with_pending_x(utt(["q"])).unwrap();
        assert!(p.with_pending_x(utt(["r"])).is_err());
    }
}
