//! Simulation config documents.
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "n_matches": 200,
//!   "master_seed": 42,
//!   "parallelism": 4,
//!   "alternate_first_server": true,
//!   "match": {"sets_to_win": 2, "games_per_set": 6, "tiebreak_at": 6},
//!   "agent_a": {"kind": "mcts", "iterations": 1000, "c": 1.4142, "selection": "uct",
//!               "decision": "greedy_value", "self_model": "avg.json", "opponent_model": "avg.json"},
//!   "agent_b": {"kind": "bot", "profile": "avg.json"}
//! }
//! ```
//!
//! Profile paths are resolved relative to the config file.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use rallyline::agents::{AgentSpec, DecisionPolicy, MctsConfig, SelectionPolicy};
use rallyline::ingest::{load_profile, ProfileIoError};
use rallyline::rules::MatchConfig;
use rallyline::shot::SkillProfile;
use rallyline::sim::BatchConfig;

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: &str = "1";

fn default_parallelism() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub schema_version: String,
    pub n_matches: u64,
    pub master_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_true")]
    pub alternate_first_server: bool,
    #[serde(default, rename = "match")]
    pub match_config: MatchConfig,
    pub agent_a: AgentConfig,
    pub agent_b: AgentConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentConfig {
    Bot {
        profile: PathBuf,
    },
    Random {
        outcome_model: PathBuf,
    },
    Mcts {
        iterations: Option<u32>,
        c: Option<f64>,
        selection: Option<SelectionPolicy>,
        decision: Option<DecisionPolicy>,
        rollout_cap: Option<u32>,
        self_model: PathBuf,
        opponent_model: PathBuf,
    },
}

#[derive(Default)]
struct ProfileCache {
    base: PathBuf,
    loaded: HashMap<PathBuf, Arc<SkillProfile>>,
}

impl ProfileCache {
    fn get(&mut self, rel: &Path) -> Result<Arc<SkillProfile>, CliError> {
        let path = self.base.join(rel);
        if let Some(p) = self.loaded.get(&path) {
            return Ok(p.clone());
        }
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read profile {}: {e}", path.display())))?;
        let profile = load_profile(&text).map_err(|e| match e {
            ProfileIoError::Invalid(report) => {
                CliError::Config(format!("profile {} is invalid: {report}", path.display()))
            }
            other => CliError::Config(format!("profile {}: {other}", path.display())),
        })?;
        let profile = Arc::new(profile);
        self.loaded.insert(path, profile.clone());
        Ok(profile)
    }
}

impl AgentConfig {
    fn resolve(&self, cache: &mut ProfileCache) -> Result<AgentSpec, CliError> {
        Ok(match self {
            AgentConfig::Bot { profile } => AgentSpec::Bot {
                profile: cache.get(profile)?,
            },
            AgentConfig::Random { outcome_model } => AgentSpec::UniformRandom {
                outcome_model: cache.get(outcome_model)?,
            },
            AgentConfig::Mcts {
                iterations,
                c,
                selection,
                decision,
                rollout_cap,
                self_model,
                opponent_model,
            } => {
                let mut cfg = MctsConfig::new(cache.get(self_model)?, cache.get(opponent_model)?);
                if let Some(v) = iterations {
                    cfg.iterations = *v;
                }
                if let Some(v) = c {
                    cfg.exploration_c = *v;
                }
                if let Some(v) = selection {
                    cfg.selection = *v;
                }
                if let Some(v) = decision {
                    cfg.decision = *v;
                }
                if let Some(v) = rollout_cap {
                    cfg.rollout_cap = *v;
                }
                AgentSpec::Mcts(cfg)
            }
        })
    }
}

/// Reads a config and loads every profile it references.
pub fn load_batch(path: &Path) -> Result<BatchConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let config: SimulateConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
    if config.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "config {}: unsupported schema_version {:?}",
            path.display(),
            config.schema_version
        )));
    }
    let mut cache = ProfileCache {
        base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ..ProfileCache::default()
    };
    let batch = BatchConfig {
        n_matches: config.n_matches,
        master_seed: config.master_seed,
        match_config: config.match_config,
        agent_a: config.agent_a.resolve(&mut cache)?,
        agent_b: config.agent_b.resolve(&mut cache)?,
        alternate_first_server: config.alternate_first_server,
        parallelism: config.parallelism,
    };
    batch
        .validate()
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let doc = r#"{
          "schema_version": "1", "n_matches": 3, "master_seed": 18446744073709551615,
          "match": {"sets_to_win": 3},
          "agent_a": {"kind": "mcts", "iterations": 10, "c": 0.5, "selection": "greedy",
                      "decision": "max_visits", "self_model": "a.json", "opponent_model": "b.json"},
          "agent_b": {"kind": "random", "outcome_model": "b.json"}
        }"#;
        let c: SimulateConfig = serde_json::from_str(doc).unwrap();
        assert_eq!(c.master_seed, u64::MAX);
        assert_eq!(c.parallelism, 1);
        assert!(c.alternate_first_server);
        assert_eq!(c.match_config.sets_to_win, 3);
        assert_eq!(c.match_config.games_per_set, 6);
        assert!(matches!(
            c.agent_a,
            AgentConfig::Mcts {
                selection: Some(SelectionPolicy::Greedy),
                decision: Some(DecisionPolicy::MaxVisits),
                ..
            }
        ));
    }

    #[test]
    fn rejects_unknown_fields() {
        let doc = r#"{"schema_version": "1", "n_matches": 3, "master_seed": 1, "extra": 1,
          "agent_a": {"kind": "bot", "profile": "a.json"}, "agent_b": {"kind": "bot", "profile": "a.json"}}"#;
        assert!(serde_json::from_str::<SimulateConfig>(doc).is_err());
        let doc = r#"{"schema_version": "1", "n_matches": 3, "master_seed": 1,
          "agent_a": {"kind": "bot", "profile": "a.json", "c": 1}, "agent_b": {"kind": "bot", "profile": "a.json"}}"#;
        assert!(serde_json::from_str::<SimulateConfig>(doc).is_err());
    }
}
