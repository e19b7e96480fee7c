//! Open-loop Monte Carlo tree search over the agent's own shot directions.
//!
//! The tree is keyed only by the agent's action sequence within the current
//! point. Shot outcomes and opponent replies are resampled from the models
//! on every descent instead of being stored as chance nodes. The search
//! horizon is the end of the point and the reward is 1 for a won point,
//! 0 otherwise.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{supported_directions, AgentError};
use crate::rng::RandomStream;
use crate::rules::{Player, RallyState};
use crate::shot::{Direction, SkillProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    Uct,
    Random,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionPolicy {
    /// Highest mean reward at the root.
    GreedyValue,
    /// Most visited root child.
    MaxVisits,
}

/// Search hyper-parameters, independent of any tennis model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams {
    pub iterations: u32,
    pub exploration_c: f64,
    pub selection: SelectionPolicy,
    pub decision: DecisionPolicy,
}

#[derive(Clone, Debug)]
pub struct MctsConfig {
    pub iterations: u32,
    pub exploration_c: f64,
    pub selection: SelectionPolicy,
    pub decision: DecisionPolicy,
    /// Shots a single rollout may play before the player on turn forfeits.
    pub rollout_cap: u32,
    /// Outcome model (and rollout policy) for the agent's own shots.
    pub self_model: Arc<SkillProfile>,
    /// Direction and outcome model for the opponent.
    pub opponent_model: Arc<SkillProfile>,
}

impl MctsConfig {
    pub const DEFAULT_ITERATIONS: u32 = 1000;
    pub const DEFAULT_ROLLOUT_CAP: u32 = 200;

    /// Defaults: 1000 iterations, C = √2, UCT selection, greedy-value
    /// decision, 200-shot rollout cap.
    pub fn new(self_model: Arc<SkillProfile>, opponent_model: Arc<SkillProfile>) -> Self {
        Self {
            iterations: Self::DEFAULT_ITERATIONS,
            exploration_c: std::f64::consts::SQRT_2,
            selection: SelectionPolicy::Uct,
            decision: DecisionPolicy::GreedyValue,
            rollout_cap: Self::DEFAULT_ROLLOUT_CAP,
            self_model,
            opponent_model,
        }
    }

    pub fn params(&self) -> SearchParams {
        SearchParams {
            iterations: self.iterations,
            exploration_c: self.exploration_c,
            selection: self.selection,
            decision: self.decision,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.iterations == 0 {
            return Err(AgentError::ZeroIterations);
        }
        if self.rollout_cap == 0 {
            return Err(AgentError::InvalidConfig("rollout_cap must be positive".into()));
        }
        if !(self.exploration_c.is_finite() && self.exploration_c >= 0.0) {
            return Err(AgentError::InvalidConfig(format!(
                "exploration constant {} must be finite and non-negative",
                self.exploration_c
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!(
            "mcts[{:?},c={},iterations={},decision={:?}]",
            self.selection, self.exploration_c, self.iterations, self.decision
        )
        .to_lowercase()
    }
}

/// `w/n + C·sqrt(ln N / n)`.
pub fn uct_value(wins: f64, visits: u32, parent_visits: u32, c: f64) -> Result<f64, AgentError> {
    if visits == 0 || parent_visits == 0 {
        return Err(AgentError::InvalidConfig(
            "uct_value needs positive child and parent visits".into(),
        ));
    }
    Ok(uct_unchecked(wins, visits, parent_visits, c))
}

fn uct_unchecked(wins: f64, visits: u32, parent_visits: u32, c: f64) -> f64 {
    let n = visits as f64;
    wins / n + c * ((parent_visits as f64).ln() / n).sqrt()
}

/// Statistics of one candidate child; `visits == 0` means unexpanded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChildStats {
    pub direction: Direction,
    pub visits: u32,
    pub wins: f64,
}

fn pick_uniform<T: Copy>(items: &[T], rng: &mut RandomStream) -> T {
    if items.len() == 1 {
        items[0]
    } else {
        items[rng.below(items.len() as u32) as usize]
    }
}

/// Maximizers of `score`, in input order.
fn argmax_set<T: Copy>(items: &[T], score: impl Fn(&T) -> f64) -> Vec<T> {
    let mut best = f64::NEG_INFINITY;
    let mut out = Vec::new();
    for it in items {
        let s = score(it);
        if s > best {
            best = s;
            out.clear();
            out.push(*it);
        } else if s == best {
            out.push(*it);
        }
    }
    out
}

/// Chooses which child to descend into. Ties are broken uniformly.
///
/// * UCT: an unvisited candidate if any, else the highest [`uct_value`].
/// * Random: uniform over all candidates.
/// * Greedy: highest mean reward; unvisited candidates count as +∞.
pub fn select_child(
    policy: SelectionPolicy,
    candidates: &[ChildStats],
    parent_visits: u32,
    c: f64,
    rng: &mut RandomStream,
) -> Result<Direction, AgentError> {
    if candidates.is_empty() {
        return Err(AgentError::InvalidConfig("no candidate directions".into()));
    }
    let unvisited: Vec<Direction> = candidates
        .iter()
        .filter(|s| s.visits == 0)
        .map(|s| s.direction)
        .collect();
    match policy {
        SelectionPolicy::Random => Ok(pick_uniform(candidates, rng).direction),
        SelectionPolicy::Uct | SelectionPolicy::Greedy if !unvisited.is_empty() => Ok(pick_uniform(&unvisited, rng)),
        SelectionPolicy::Uct => {
            let parent = parent_visits.max(1);
            let best = argmax_set(candidates, |s| uct_unchecked(s.wins, s.visits, parent, c));
            Ok(pick_uniform(&best, rng).direction)
        }
        SelectionPolicy::Greedy => {
            let best = argmax_set(candidates, |s| s.wins / s.visits as f64);
            Ok(pick_uniform(&best, rng).direction)
        }
    }
}

/// Visit and reward totals of one tree node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchNode {
    pub visits: u32,
    pub wins: f64,
    pub children: Vec<(Direction, usize)>,
}

/// Arena of search nodes; node 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchTree {
    pub nodes: Vec<SearchNode>,
}

impl SearchTree {
    fn new() -> Self {
        Self {
            nodes: vec![SearchNode::default()],
        }
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    pub fn child(&self, node: usize, direction: Direction) -> Option<usize> {
        self.nodes[node]
            .children
            .iter()
            .find(|(d, _)| *d == direction)
            .map(|&(_, i)| i)
    }

    /// Root child statistics for the given directions (zeros if unexpanded).
    pub fn root_stats(&self, directions: &[Direction]) -> Vec<ChildStats> {
        self.stats(0, directions)
    }

    fn stats(&self, node: usize, directions: &[Direction]) -> Vec<ChildStats> {
        directions
            .iter()
            .map(|&direction| match self.child(node, direction) {
                Some(i) => ChildStats {
                    direction,
                    visits: self.nodes[i].visits,
                    wins: self.nodes[i].wins,
                },
                None => ChildStats {
                    direction,
                    visits: 0,
                    wins: 0.0,
                },
            })
            .collect()
    }

    fn child_or_insert(&mut self, node: usize, direction: Direction) -> usize {
        if let Some(i) = self.child(node, direction) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(SearchNode::default());
        self.nodes[node].children.push((direction, i));
        i
    }
}

/// The environment a search runs in. The state is always at one of the
/// agent's decisions.
pub trait SearchEnv {
    type State: Clone;

    /// Directions the agent may pick at `state`.
    fn legal(&self, state: &Self::State) -> Result<Vec<Direction>, AgentError>;

    /// Plays the agent's shot and everything after it up to the agent's next
    /// decision. Returns the reward if the point ended on the way.
    fn step(
        &self,
        state: &mut Self::State,
        direction: Direction,
        rng: &mut RandomStream,
    ) -> Result<Option<f64>, AgentError>;

    /// Plays the point out with the default policies and returns the reward.
    fn rollout(&self, state: &Self::State, rng: &mut RandomStream) -> Result<f64, AgentError>;
}

/// Runs `params.iterations` select/expand/rollout/backpropagate cycles.
pub fn run_search<E: SearchEnv>(
    env: &E,
    root: &E::State,
    params: &SearchParams,
    rng: &mut RandomStream,
) -> Result<SearchTree, AgentError> {
    if params.iterations == 0 {
        return Err(AgentError::ZeroIterations);
    }
    let mut tree = SearchTree::new();
    let mut path = Vec::new();
    for _ in 0..params.iterations {
        let mut state = root.clone();
        let mut node = 0;
        path.clear();
        path.push(0);
        let reward = loop {
            let legal = env.legal(&state)?;
            let stats = tree.stats(node, &legal);
            let direction = select_child(
                params.selection,
                &stats,
                tree.nodes[node].visits,
                params.exploration_c,
                rng,
            )?;
            let expanded = tree.child(node, direction).is_none();
            let child = tree.child_or_insert(node, direction);
            path.push(child);
            if let Some(r) = env.step(&mut state, direction, rng)? {
                break r;
            }
            if expanded {
                break env.rollout(&state, rng)?;
            }
            node = child;
        };
        for &i in &path {
            tree.nodes[i].visits += 1;
            tree.nodes[i].wins += reward;
        }
    }
    Ok(tree)
}

/// Final choice among the root's `legal` children.
pub fn decide(
    tree: &SearchTree,
    legal: &[Direction],
    policy: DecisionPolicy,
    rng: &mut RandomStream,
) -> Result<Direction, AgentError> {
    let visited: Vec<ChildStats> = tree.root_stats(legal).into_iter().filter(|s| s.visits > 0).collect();
    if visited.is_empty() {
        return Err(AgentError::ZeroIterations);
    }
    let best = match policy {
        DecisionPolicy::GreedyValue => argmax_set(&visited, |s| s.wins / s.visits as f64),
        DecisionPolicy::MaxVisits => argmax_set(&visited, |s| s.visits as f64),
    };
    Ok(pick_uniform(&best, rng).direction)
}

/// A point seen from the searching player.
pub struct PointEnv<'a> {
    pub me: Player,
    pub self_model: &'a SkillProfile,
    pub opponent_model: &'a SkillProfile,
    pub rollout_cap: u32,
}

impl PointEnv<'_> {
    fn model(&self, hitter: Player) -> &SkillProfile {
        if hitter == self.me {
            self.self_model
        } else {
            self.opponent_model
        }
    }

    fn reward(&self, winner: Player) -> f64 {
        if winner == self.me {
            1.0
        } else {
            0.0
        }
    }

    /// One shot by the current hitter from its model. Returns the winner if
    /// the point ended.
    fn play_model_shot(&self, state: &mut RallyState, rng: &mut RandomStream) -> Result<Option<Player>, AgentError> {
        let ctx = state.context().ok_or(AgentError::NotAgentTurn)?;
        let model = self.model(state.hitter());
        let direction = model.sample_direction(&ctx, rng)?;
        let outcome = model.sample_outcome(&ctx, direction, rng)?;
        state.apply(direction, outcome)?;
        Ok(state.winner())
    }
}

impl SearchEnv for PointEnv<'_> {
    type State = RallyState;

    fn legal(&self, state: &RallyState) -> Result<Vec<Direction>, AgentError> {
        let ctx = state.context().ok_or(AgentError::NotAgentTurn)?;
        supported_directions(self.self_model, &ctx)
    }

    fn step(
        &self,
        state: &mut RallyState,
        direction: Direction,
        rng: &mut RandomStream,
    ) -> Result<Option<f64>, AgentError> {
        let ctx = state.context().ok_or(AgentError::NotAgentTurn)?;
        let outcome = self.self_model.sample_outcome(&ctx, direction, rng)?;
        state.apply(direction, outcome)?;
        loop {
            if let Some(w) = state.winner() {
                return Ok(Some(self.reward(w)));
            }
            if state.hitter() == self.me {
                return Ok(None);
            }
            self.play_model_shot(state, rng)?;
        }
    }

    fn rollout(&self, state: &RallyState, rng: &mut RandomStream) -> Result<f64, AgentError> {
        let mut state = state.clone();
        let mut shots = 0;
        loop {
            if let Some(w) = state.winner() {
                return Ok(self.reward(w));
            }
            if shots >= self.rollout_cap {
                return Ok(self.reward(state.hitter().other()));
            }
            self.play_model_shot(&mut state, rng)?;
            shots += 1;
        }
    }
}

/// Plays the point from `state` to the end with both players drawing from
/// their models. Returns 1 if `me` wins the point.
pub fn rollout(
    state: &RallyState,
    me: Player,
    self_model: &SkillProfile,
    opponent_model: &SkillProfile,
    rng: &mut RandomStream,
    cap: u32,
) -> Result<f64, AgentError> {
    let env = PointEnv {
        me,
        self_model,
        opponent_model,
        rollout_cap: cap,
    };
    env.rollout(state, rng)
}

/// Searches from `state` (where `me` is on turn) and returns the tree.
pub fn mcts_search(
    state: &RallyState,
    me: Player,
    config: &MctsConfig,
    rng: &mut RandomStream,
) -> Result<(Direction, SearchTree), AgentError> {
    config.validate()?;
    if state.is_finished() || state.hitter() != me {
        return Err(AgentError::NotAgentTurn);
    }
    let env = PointEnv {
        me,
        self_model: &config.self_model,
        opponent_model: &config.opponent_model,
        rollout_cap: config.rollout_cap,
    };
    let legal = env.legal(state)?;
    let tree = run_search(&env, state, &config.params(), rng)?;
    let choice = decide(&tree, &legal, config.decision, rng)?;
    Ok((choice, tree))
}

pub fn mcts_decide(
    state: &RallyState,
    me: Player,
    config: &MctsConfig,
    rng: &mut RandomStream,
) -> Result<Direction, AgentError> {
    mcts_search(state, me, config, rng).map(|(d, _)| d)
}
