//! Versioned TOML config files: game definitions (optionally based on a
//! built-in game), a classifier table keyed by id, and optional experiment
//! and llm sections.

use crate::classifier::ClassifierSpec;
use crate::game::{
    builtin_game, BuiltinGame, GameError, GameSpec, MenuRule, Token, UtilityRow, UtilityTable,
};
use crate::harness::ExperimentSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unsupported spec_version {0} (this build reads version {SPEC_VERSION})")]
    Version(u32),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MenusSection {
    #[serde(default)]
    pub x: Vec<MenuRule>,
    #[serde(default)]
    pub y: Vec<MenuRule>,
}

/// The `[game]` table. Either names a built-in game and overrides parts of
/// it, or defines types, priors and utilities from scratch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GameSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<Token>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_utterance_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_stages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_types: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_types: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<UtilityRow>>,
    pub classifier_id: String,
    #[serde(default)]
    pub menus: MenusSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seed_text: Vec<Token>,
}

/// The `[llm]` table: backend wiring for free-text players and the external
/// judge. `mock_replies` points at a fixture file; `fixtures_dir` holds the
/// prompt texts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmSection {
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_replies: Option<String>,
    #[serde(default = "default_fixtures_dir")]
    pub fixtures_dir: String,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests_per_sec: Option<f64>,
}

fn default_fixtures_dir() -> String {
    "fixtures".into()
}
fn default_in_flight() -> usize {
    4
}

/// The `[play]` table: the two seats of an interactive session, one of which
/// is usually `kind = "human"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaySection {
    pub agent_x: crate::agent::AgentConfig,
    pub agent_y: crate::agent::AgentConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub spec_version: u32,
    pub game: GameSection,
    #[serde(default)]
    pub classifiers: BTreeMap<String, ClassifierSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub play: Option<PlaySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llm: Option<LlmSection>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, ConfigError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if file.spec_version != SPEC_VERSION {
            return Err(ConfigError::Version(file.spec_version));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<ConfigFile, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        ConfigFile::parse(&text)
    }

    /// Resolve `[game]` plus the classifier table into a validated GameSpec.
    pub fn resolve_game(&self) -> Result<GameSpec, ConfigError> {
        let g = &self.game;
        let mut spec = match &g.builtin {
            Some(name) => builtin_game(BuiltinGame::from_str(name)?),
            None => GameSpec {
                name: String::new(),
                alphabet: Default::default(),
                max_utterance_len: 16,
                max_stages: 3,
                x_types: Vec::new(),
                y_types: Vec::new(),
                prior_y: Vec::new(),
                prior_x: None,
                utilities: UtilityTable::new(Vec::new()),
                classifier_id: String::new(),
                classifier: ClassifierSpec::Constant {
                    verdict: crate::game::Verdict::Cont,
                },
                menus: Default::default(),
                seed_text: Vec::new(),
            },
        };
        if let Some(name) = &g.name {
            spec.name = name.clone();
        }
        if let Some(alphabet) = &g.alphabet {
            spec.alphabet = alphabet.iter().cloned().collect();
        }
        if let Some(l) = g.max_utterance_len {
            spec.max_utterance_len = l;
        }
        if let Some(d) = g.max_stages {
            spec.max_stages = d;
        }
        if let Some(types) = &g.x_types {
            spec.x_types = types.clone();
        }
        if let Some(types) = &g.y_types {
            spec.y_types = types.clone();
            spec.prior_y = vec![1.0 / types.len() as f64; types.len()];
        }
        if let Some(prior) = &g.prior_y {
            spec.prior_y = prior.clone();
        }
        if let Some(prior) = &g.prior_x {
            spec.prior_x = Some(prior.clone());
        }
        if let Some(rows) = &g.utilities {
            spec.utilities = UtilityTable::new(rows.clone());
        }
        spec.menus.x = g.menus.x.clone();
        spec.menus.y = g.menus.y.clone();
        if !g.seed_text.is_empty() {
            spec.seed_text = g.seed_text.clone();
        }
        spec.classifier_id = g.classifier_id.clone();
        spec.classifier = self
            .classifiers
            .get(&g.classifier_id)
            .cloned()
            .ok_or_else(|| {
                ConfigError::Invalid(format!(
                    "classifier_id {:?} not found in [classifiers]",
                    g.classifier_id
                ))
            })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn resolve_experiment(&self) -> Result<(GameSpec, ExperimentSpec), ConfigError> {
        let spec = self.resolve_game()?;
        let experiment = self
            .experiment
            .clone()
            .ok_or_else(|| ConfigError::Invalid("config has no [experiment] section".into()))?;
        Ok((spec, experiment))
    }

    /// Content digest recorded in MatchRecords: sha256 over the canonical
    /// JSON encoding of the parsed config.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config is serializable");
        let mut hasher = Sha256::new();
        hasher.update(&canonical);
        crate::llm::hex(&hasher.finalize())
    }
}

/// Convenience for tests and defaults: wrap an in-memory GameSpec in a
/// ConfigFile-shaped digest.
pub fn spec_digest(spec: &GameSpec) -> String {
    let canonical = serde_json::to_vec(spec).expect("spec is serializable");
    let mut hasher = Sha256::new();
    hasher.update(&canonical);
    crate::llm::hex(&hasher.finalize())
}
