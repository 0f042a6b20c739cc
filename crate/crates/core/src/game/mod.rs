//! The verdict-game formalism: tokens, utterances, stages, conversation
//! states, game specs, utility tables and per-context action menus.

mod builtin;
mod spec;
mod state;

pub use builtin::{builtin_game, BuiltinGame};
pub use spec::{GameSpec, MenuRule, MenuTable, UtilityRow, UtilityTable};
pub use state::{parse_transcript, ConversationState, SerializeStyle, Stage, Transcript};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("invalid token {0:?}: tokens are non-empty and free of whitespace, '#' and '@'")]
    InvalidToken(String),
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error("utterance {0:?} exceeds the length cap l={1}")]
    OverLength(String, usize),
    #[error("token {0:?} is not in the game alphabet")]
    UnknownToken(String),
    #[error("game is over: cannot query or move in a terminal state")]
    GameOver,
    #[error("out of turn: {0}")]
    OutOfTurn(String),
    #[error("no menu configured for {player} in this context")]
    EmptyMenu { player: Player },
    #[error("unknown player type {0:?}")]
    UnknownType(String),
    #[error("no utility entry for (player={player}, t_x={t_x}, t_y={t_y}, verdict={verdict})")]
    MissingUtility {
        player: Player,
        t_x: String,
        t_y: String,
        verdict: Verdict,
    },
    #[error("unknown builtin game {0:?}")]
    UnknownBuiltin(String),
    #[error("invalid game spec: {0}")]
    InvalidSpec(String),
    #[error("transcript parse error: {0}")]
    Parse(String),
}

/// The two players. X opens every stage, Y replies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    X,
    Y,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::X => Player::Y,
            Player::Y => Player::X,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::X => write!(f, "X"),
            Player::Y => write!(f, "Y"),
        }
    }
}

/// Judge output after a completed stage. `Zero` and `One` are conclusive;
/// `Cont` lets the conversation continue (or stands as the terminal verdict
/// when the stage cap is reached).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Zero,
    One,
    Cont,
}

impl Verdict {
    pub fn is_conclusive(self) -> bool {
        !matches!(self, Verdict::Cont)
    }

    /// The other conclusive verdict. `Cont` has no opposite.
    pub fn opposite(self) -> Option<Verdict> {
        match self {
            Verdict::Zero => Some(Verdict::One),
            Verdict::One => Some(Verdict::Zero),
            Verdict::Cont => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Zero => write!(f, "0"),
            Verdict::One => write!(f, "1"),
            Verdict::Cont => write!(f, "Cont"),
        }
    }
}

/// An atom of the alphabet. Tokens are opaque identifiers; they may not
/// contain whitespace or the stage delimiters '#' and '@', so serialized
/// transcripts always parse back unambiguously.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(symbol: impl Into<String>) -> Result<Token, GameError> {
        let symbol = symbol.into();
        if symbol.is_empty()
            || symbol
                .chars()
                .any(|c| c.is_whitespace() || c == '#' || c == '@')
        {
            return Err(GameError::InvalidToken(symbol));
        }
        Ok(Token(symbol))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = GameError;
    fn try_from(s: String) -> Result<Token, GameError> {
        Token::new(s)
    }
}

impl From<Token> for String {
    fn from(t: Token) -> String {
        t.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One move: a non-empty token sequence of length at most `l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Utterance(Vec<Token>);

impl Utterance {
    pub fn new(tokens: Vec<Token>) -> Result<Utterance, GameError> {
        if tokens.is_empty() {
            return Err(GameError::EmptyUtterance);
        }
        Ok(Utterance(tokens))
    }

    /// Parse whitespace-separated tokens.
    pub fn parse(text: &str) -> Result<Utterance, GameError> {
        let tokens = text
            .split_whitespace()
            .map(Token::new)
            .collect::<Result<Vec<_>, _>>()?;
        Utterance::new(tokens)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Tokens joined with single spaces.
    pub fn text(&self) -> String {
        self.0
            .iter()
            .map(Token::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Utterance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// A player's private type, e.g. Guilty / Non-Guilty or Human / Machine.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlayerType {
    pub player: Player,
    pub label: String,
}

impl PlayerType {
    pub fn new(player: Player, label: impl Into<String>) -> PlayerType {
        PlayerType {
            player,
            label: label.into(),
        }
    }
}

/// Convenience constructor for tests and configs: `utt(["a", "b"])`.
pub fn utt<I, S>(tokens: I) -> Utterance
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    Utterance::new(
        tokens
            .into_iter()
            .map(|s| Token::new(s).expect("valid token"))
            .collect(),
    )
    .expect("non-empty utterance")
}
