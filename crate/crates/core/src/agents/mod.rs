//! Direction-choosing policies.
//!
//! Every agent also owns an outcome model: the profile whose conditionals
//! decide how its chosen shots turn out.

use std::sync::Arc;

use thiserror::Error;

use crate::rng::RandomStream;
use crate::rules::{Player, RallyState, RulesError};
use crate::shot::{Direction, HitterContext, ShotModelError, SkillProfile};

pub mod mcts;

pub use mcts::{
    mcts_decide, mcts_search, rollout, select_child, uct_value, ChildStats, DecisionPolicy, MctsConfig, SearchNode,
    SearchTree, SelectionPolicy,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error(transparent)]
    ShotModel(#[from] ShotModelError),
    #[error(transparent)]
    Rules(#[from] RulesError),
    #[error("search needs at least one iteration")]
    ZeroIterations,
    #[error("no legal direction in context {0}")]
    NoLegalDirection(HitterContext),
    #[error("it is not the agent's turn")]
    NotAgentTurn,
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
}

/// Anything that can pick a shot direction during a point.
pub trait Agent: Send + Sync {
    /// Picks a direction for `me`, who is the current hitter of `rally`.
    fn choose(&self, rally: &RallyState, me: Player, rng: &mut RandomStream) -> Result<Direction, AgentError>;

    /// Profile governing the outcomes of this agent's shots.
    fn outcome_model(&self) -> &SkillProfile;

    /// Short human-readable description for logs.
    fn label(&self) -> String;
}

/// Samples a direction from the profile's marginal in `ctx`. One draw.
pub fn bot_decide(
    profile: &SkillProfile,
    ctx: &HitterContext,
    rng: &mut RandomStream,
) -> Result<Direction, AgentError> {
    Ok(profile.sample_direction(ctx, rng)?)
}

/// Directions with positive marginal mass in `ctx`.
pub fn supported_directions(profile: &SkillProfile, ctx: &HitterContext) -> Result<Vec<Direction>, AgentError> {
    let marginal = profile.direction_marginal(ctx)?;
    let legal = ctx.legal_directions();
    let dirs: Vec<Direction> = (0..3).filter(|&i| marginal[i] > 0.0).map(|i| legal[i]).collect();
    if dirs.is_empty() {
        return Err(AgentError::NoLegalDirection(*ctx));
    }
    Ok(dirs)
}

fn current_context(rally: &RallyState, me: Player) -> Result<HitterContext, AgentError> {
    if rally.hitter() != me {
        return Err(AgentError::NotAgentTurn);
    }
    rally.context().ok_or(AgentError::Rules(RulesError::RallyFinished))
}

#[derive(Clone, Debug)]
pub enum AgentSpec {
    /// Data-driven bot: directions from the profile's marginal.
    Bot {
        profile: Arc<SkillProfile>,
    },
    Mcts(MctsConfig),
    /// Uniform over the directions its outcome model supports.
    UniformRandom {
        outcome_model: Arc<SkillProfile>,
    },
}

impl AgentSpec {
    pub fn validate(&self) -> Result<(), AgentError> {
        let check = |p: &SkillProfile, what: &str| {
            let report = p.validate();
            if report.is_valid() {
                Ok(())
            } else {
                Err(AgentError::InvalidConfig(format!(
                    "{what} profile is invalid: {report}"
                )))
            }
        };
        match self {
            AgentSpec::Bot { profile } => check(profile, "bot"),
            AgentSpec::UniformRandom { outcome_model } => check(outcome_model, "outcome"),
            AgentSpec::Mcts(cfg) => {
                cfg.validate()?;
                check(&cfg.self_model, "self")?;
                check(&cfg.opponent_model, "opponent")
            }
        }
    }
}

impl Agent for AgentSpec {
    fn choose(&self, rally: &RallyState, me: Player, rng: &mut RandomStream) -> Result<Direction, AgentError> {
        match self {
            AgentSpec::Bot { profile } => bot_decide(profile, &current_context(rally, me)?, rng),
            AgentSpec::UniformRandom { outcome_model } => {
                let dirs = supported_directions(outcome_model, &current_context(rally, me)?)?;
                Ok(dirs[rng.below(dirs.len() as u32) as usize])
            }
            AgentSpec::Mcts(cfg) => mcts_decide(rally, me, cfg, rng),
        }
    }

    fn outcome_model(&self) -> &SkillProfile {
        match self {
            AgentSpec::Bot { profile } => profile,
            AgentSpec::UniformRandom { outcome_model } => outcome_model,
            AgentSpec::Mcts(cfg) => &cfg.self_model,
        }
    }

    fn label(&self) -> String {
        match self {
            AgentSpec::Bot { profile } => format!("bot[{}]", profile.provenance),
            AgentSpec::UniformRandom { outcome_model } => format!("random[{}]", outcome_model.provenance),
            AgentSpec::Mcts(cfg) => cfg.label(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shot::{ServeNumber, Side};

    fn rally_ctx() -> HitterContext {
        HitterContext::Rally {
            hitter_served: false,
            serve_number: ServeNumber::First,
            previous_direction: Direction::MIDDLE,
        }
    }

    #[test]
    fn degenerate_marginal_always_picks_its_direction() {
        let mut p = SkillProfile::uniform("u");
        p.set_table(rally_ctx(), [[0.0; 3], [0.3, 0.3, 0.4], [0.0; 3]]);
        let mut rng = RandomStream::from_seed(3);
        for _ in 0..500 {
            assert_eq!(bot_decide(&p, &rally_ctx(), &mut rng).unwrap(), Direction::MIDDLE);
        }
    }

    #[test]
    fn uniform_marginal_frequencies() {
        let p = SkillProfile::uniform("u");
        let mut rng = RandomStream::from_seed(11);
        let mut counts = [0u32; 3];
        let n = 30_000;
        for _ in 0..n {
            counts[bot_decide(&p, &rally_ctx(), &mut rng).unwrap().slot()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn serve_context_yields_serve_codes() {
        let p = SkillProfile::uniform("u");
        let ctx = HitterContext::Serve {
            side: Side::Advantage,
            serve_number: ServeNumber::Second,
        };
        let mut rng = RandomStream::from_seed(5);
        for _ in 0..200 {
            assert!(bot_decide(&p, &ctx, &mut rng).unwrap().is_serve());
        }
    }

    #[test]
    fn random_agent_avoids_unsupported_directions() {
        let mut p = SkillProfile::uniform("u");
        let ctx = HitterContext::Serve {
            side: Side::Deuce,
            serve_number: ServeNumber::First,
        };
        p.set_table(ctx, [[0.5, 0.1, 0.4], [0.0; 3], [0.0; 3]]);
        let agent = AgentSpec::UniformRandom {
            outcome_model: Arc::new(p),
        };
        let rally = RallyState::new(Player::A, Side::Deuce);
        let mut rng = RandomStream::from_seed(1);
        for _ in 0..100 {
            assert_eq!(agent.choose(&rally, Player::A, &mut rng).unwrap(), Direction::WIDE);
        }
        assert_eq!(agent.choose(&rally, Player::B, &mut rng), Err(AgentError::NotAgentTurn));
    }
}
