//! Points, matches and seeded batches between two agents.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentError, AgentSpec};
use crate::analytics::{win_summary, SideSummary};
use crate::rng::{split_seed, RandomStream};
use crate::rules::{MatchConfig, MatchScore, Player, RallyState, RulesError};
use crate::shot::{Direction, HitterContext, Outcome, Side};

pub const RECORD_SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub hitter: Player,
    pub context: HitterContext,
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u8>,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRecord {
    /// Live score before the point, e.g. `6-4 2-1 30-15`.
    pub score_before: String,
    pub server: Player,
    pub side: Side,
    /// Whether a second serve was needed.
    pub second_serve: bool,
    /// Every stroke including faults.
    pub shots: Vec<ShotRecord>,
    /// Counted shots (faults excluded, ace = 1, double fault = 0).
    pub rally_length: u32,
    pub winner: Player,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub capped: bool,
}

impl PointRecord {
    pub fn is_double_fault(&self) -> bool {
        self.rally_length == 0
    }

    /// Shots after the faults: the landed serve and the rest of the rally.
    pub fn counted_shots(&self) -> &[ShotRecord] {
        let faults = self.shots.len() - self.rally_length as usize;
        &self.shots[faults..]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub schema_version: String,
    pub match_index: u64,
    pub match_seed: u64,
    pub agent_a: String,
    pub agent_b: String,
    pub first_server: Player,
    pub match_config: MatchConfig,
    pub final_score: String,
    pub winner: Player,
    pub points: Vec<PointRecord>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Rules(#[from] RulesError),
    #[error("invalid batch config: {0}")]
    InvalidBatch(String),
}

/// Plays one point from `score`. `agents[0]` plays A, `agents[1]` plays B.
pub fn play_point(
    score: &MatchScore,
    agents: [&dyn Agent; 2],
    rng: &mut RandomStream,
) -> Result<PointRecord, SimError> {
    if score.is_complete() {
        return Err(RulesError::MatchCompleted.into());
    }
    let cap = score.config().rally_shot_cap;
    let mut rally = RallyState::for_point(score);
    let mut shots = Vec::new();
    let winner = loop {
        if let Some(w) = rally.winner() {
            break w;
        }
        if let Some(w) = rally.enforce_cap(cap) {
            break w;
        }
        let context = rally.context().ok_or(RulesError::RallyFinished)?;
        let hitter = rally.hitter();
        let agent = agents[hitter.index()];
        let direction = agent.choose(&rally, hitter, rng)?;
        let outcome = agent
            .outcome_model()
            .sample_outcome(&context, direction, rng)
            .map_err(AgentError::from)?;
        rally.apply(direction, outcome)?;
        shots.push(ShotRecord {
            hitter,
            context,
            direction,
            depth: None,
            outcome,
        });
    };
    Ok(PointRecord {
        score_before: score.to_string(),
        server: rally.server(),
        side: rally.side(),
        second_serve: rally.serve_number() == crate::shot::ServeNumber::Second,
        rally_length: rally.shot_count(),
        shots,
        winner,
        capped: rally.was_capped(),
    })
}

/// Plays a full match with a stream derived only from `match_seed`.
pub fn play_match(
    config: MatchConfig,
    agents: [&dyn Agent; 2],
    first_server: Player,
    match_seed: u64,
    match_index: u64,
) -> Result<MatchRecord, SimError> {
    let mut score = MatchScore::new(config, first_server)?;
    let mut rng = RandomStream::from_seed(match_seed);
    let mut points = Vec::new();
    while !score.is_complete() {
        let point = play_point(&score, agents, &mut rng)?;
        score = score.apply_point(point.winner)?;
        points.push(point);
    }
    Ok(MatchRecord {
        schema_version: RECORD_SCHEMA_VERSION.into(),
        match_index,
        match_seed,
        agent_a: agents[0].label(),
        agent_b: agents[1].label(),
        first_server,
        match_config: config,
        final_score: score.render_sets(),
        winner: score.match_winner().expect("completed match has a winner"),
        points,
    })
}

/// Re-derives the final score from the point winners.
pub fn replay(record: &MatchRecord) -> Result<MatchScore, RulesError> {
    let mut score = MatchScore::new(record.match_config, record.first_server)?;
    for p in &record.points {
        if p.server != score.server() {
            return Err(RulesError::InvalidConfig(format!(
                "point at {} served by {:?}, expected {:?}",
                score,
                p.server,
                score.server()
            )));
        }
        score = score.apply_point(p.winner)?;
    }
    Ok(score)
}

/// Whether the replayed score matches the recorded one.
pub fn replay_matches(record: &MatchRecord) -> bool {
    match replay(record) {
        Ok(s) => s.is_complete() && s.render_sets() == record.final_score && s.match_winner() == Some(record.winner),
        Err(_) => false,
    }
}

#[derive(Clone, Debug)]
pub struct BatchConfig {
    pub n_matches: u64,
    pub master_seed: u64,
    pub match_config: MatchConfig,
    pub agent_a: AgentSpec,
    pub agent_b: AgentSpec,
    /// A serves first in even-indexed matches, B in odd ones.
    pub alternate_first_server: bool,
    pub parallelism: usize,
}

impl BatchConfig {
    pub fn new(agent_a: AgentSpec, agent_b: AgentSpec, n_matches: u64, master_seed: u64) -> Self {
        Self {
            n_matches,
            master_seed,
            match_config: MatchConfig::default(),
            agent_a,
            agent_b,
            alternate_first_server: true,
            parallelism: 1,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_matches == 0 {
            return Err(SimError::InvalidBatch("n_matches must be positive".into()));
        }
        if self.parallelism == 0 {
            return Err(SimError::InvalidBatch("parallelism must be at least 1".into()));
        }
        self.match_config.validate()?;
        self.agent_a.validate()?;
        self.agent_b.validate()?;
        Ok(())
    }

    pub fn match_seed(&self, index: u64) -> u64 {
        split_seed(self.master_seed, index)
    }

    pub fn first_server(&self, index: u64) -> Player {
        if self.alternate_first_server && index % 2 == 1 {
            Player::B
        } else {
            Player::A
        }
    }

    pub fn play(&self, index: u64) -> Result<MatchRecord, SimError> {
        play_match(
            self.match_config,
            [&self.agent_a, &self.agent_b],
            self.first_server(index),
            self.match_seed(index),
            index,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedMatch {
    pub match_index: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub schema_version: String,
    pub master_seed: u64,
    pub n_matches: u64,
    pub completed: u64,
    /// Side A then side B.
    pub sides: [SideSummary; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<FailedMatch>,
}

#[derive(Clone, Debug)]
pub struct BatchOutcome {
    /// Completed matches in index order.
    pub records: Vec<MatchRecord>,
    pub summary: BatchSummary,
}

impl BatchOutcome {
    pub fn is_complete(&self) -> bool {
        self.summary.failed.is_empty()
    }
}

/// Runs the batch on up to `parallelism` threads. Results do not depend on
/// the thread count. The first failing match stops further scheduling;
/// matches already finished are kept and failures are listed in the summary.
pub fn run_batch(batch: &BatchConfig) -> Result<BatchOutcome, SimError> {
    batch.validate()?;
    let n = batch.n_matches;
    let results: Mutex<Vec<(u64, Result<MatchRecord, SimError>)>> = Mutex::new(Vec::new());
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let worker = || loop {
        if abort.load(Ordering::Relaxed) {
            return;
        }
        let i = next.fetch_add(1, Ordering::Relaxed) as u64;
        if i >= n {
            return;
        }
        let r = batch.play(i);
        if r.is_err() {
            abort.store(true, Ordering::Relaxed);
        }
        results.lock().expect("no poisoned lock").push((i, r));
    };
    let threads = batch.parallelism.min(n as usize);
    if threads <= 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(worker);
            }
        });
    }
    let mut results = results.into_inner().expect("no poisoned lock");
    results.sort_by_key(|(i, _)| *i);
    let mut records = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    for (i, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failed.push(FailedMatch {
                match_index: i,
                error: e.to_string(),
            }),
        }
    }
    let labels = [batch.agent_a.label(), batch.agent_b.label()];
    let summary = BatchSummary {
        schema_version: RECORD_SCHEMA_VERSION.into(),
        master_seed: batch.master_seed,
        n_matches: n,
        completed: records.len() as u64,
        sides: win_summary(&records, labels),
        failed,
    };
    Ok(BatchOutcome { records, summary })
}

/// Parameter varied by [`run_sweep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    C,
    Iterations,
}

impl SweepParam {
    pub fn parse(s: &str) -> Option<SweepParam> {
        match s {
            "c" => Some(SweepParam::C),
            "iterations" => Some(SweepParam::Iterations),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepBatch {
    pub label: String,
    pub outcome: BatchOutcome,
}

/// Runs one batch per value, varying the MCTS agent on `side`. Every batch
/// uses the base master seed.
pub fn run_sweep(
    base: &BatchConfig,
    side: Player,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<SweepBatch>, SimError> {
    if values.is_empty() {
        return Err(SimError::InvalidBatch("sweep needs at least one value".into()));
    }
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        let mut batch = base.clone();
        let agent = match side {
            Player::A => &mut batch.agent_a,
            Player::B => &mut batch.agent_b,
        };
        let AgentSpec::Mcts(cfg) = agent else {
            return Err(SimError::InvalidBatch(format!("side {side:?} is not an MCTS agent")));
        };
        let label = match param {
            SweepParam::C => {
                cfg.exploration_c = v;
                format!("c={v}")
            }
            SweepParam::Iterations => {
                if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(SimError::InvalidBatch(format!(
                        "iterations value {v} is not a positive integer"
                    )));
                }
                cfg.iterations = v as u32;
                format!("iterations={v}")
            }
        };
        out.push(SweepBatch {
            label,
            outcome: run_batch(&batch)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("line {line}: unsupported schema_version {version:?}")]
    Version { line: usize, version: String },
}

/// One record per line.
pub fn write_jsonl<W: Write>(records: &[MatchRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<MatchRecord>, JsonlError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: MatchRecord =
            serde_json::from_str(&line).map_err(|source| JsonlError::Parse { line: i + 1, source })?;
        if record.schema_version != RECORD_SCHEMA_VERSION {
            return Err(JsonlError::Version {
                line: i + 1,
                version: record.schema_version,
            });
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shot::{ServeNumber, SkillProfile};
    use crate::synthetic::PlayerParams;
    use std::sync::Arc;

    fn bot(p: SkillProfile) -> AgentSpec {
        AgentSpec::Bot { profile: Arc::new(p) }
    }

    fn ace_machine() -> SkillProfile {
        SkillProfile::from_fn("aces", |ctx| {
            if ctx.is_serve() {
                [[0.0; 3], [0.0; 3], [0.0, 1.0, 0.0]]
            } else {
                [[0.0, 1.0, 0.0], [0.0; 3], [0.0; 3]]
            }
        })
    }

    fn double_faulter() -> SkillProfile {
        SkillProfile::from_fn("faults", |ctx| {
            if ctx.is_serve() {
                [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]
            } else {
                [[0.5, 0.5, 0.0], [0.0; 3], [0.0; 3]]
            }
        })
    }

    #[test]
    fn forced_ace() {
        let a = bot(ace_machine());
        let b = bot(PlayerParams::default().profile("avg"));
        let score = MatchScore::new(MatchConfig::default(), Player::A).unwrap();
        let mut rng = RandomStream::from_seed(1);
        let p = play_point(&score, [&a, &b], &mut rng).unwrap();
        assert_eq!(p.rally_length, 1);
        assert_eq!(p.winner, Player::A);
        assert_eq!(p.shots[0].direction, Direction::T);
        assert_eq!(p.score_before, "0-0 0-0");
    }

    #[test]
    fn double_fault_point() {
        let a = bot(double_faulter());
        let b = bot(PlayerParams::default().profile("avg"));
        let score = MatchScore::new(MatchConfig::default(), Player::A).unwrap();
        let mut rng = RandomStream::from_seed(1);
        let p = play_point(&score, [&a, &b], &mut rng).unwrap();
        assert_eq!(p.rally_length, 0);
        assert!(p.is_double_fault() && p.second_serve);
        assert_eq!(p.winner, Player::B);
        assert_eq!(p.shots.len(), 2);
        assert!(p.counted_shots().is_empty());
        assert_eq!(
            p.shots[1].context,
            HitterContext::Serve {
                side: Side::Deuce,
                serve_number: ServeNumber::Second
            }
        );
    }

    #[test]
    fn same_seed_same_point() {
        let avg = bot(PlayerParams::default().profile("avg"));
        let score = MatchScore::new(MatchConfig::default(), Player::B).unwrap();
        let run = || play_point(&score, [&avg, &avg], &mut RandomStream::from_seed(42)).unwrap();
        assert_eq!(run(), run());
    }

    #[test]
    fn dominant_player_wins_six_love() {
        let winner_everywhere = SkillProfile::from_fn("w", |_| [[0.0, 1.0, 0.0], [0.0; 3], [0.0; 3]]);
        let a = bot(winner_everywhere);
        let b = bot(PlayerParams::default().profile("avg"));
        for seed in 0..5 {
            let first = if seed % 2 == 0 { Player::A } else { Player::B };
            let m = play_match(MatchConfig::default(), [&a, &b], first, seed, seed).unwrap();
            assert_eq!(m.final_score, "6-0 6-0");
            assert_eq!(m.winner, Player::A);
            assert!(replay_matches(&m));
        }
    }

    #[test]
    fn rally_cap_ends_points() {
        let never_ends = SkillProfile::from_fn("loop", |ctx| {
            if ctx.is_serve() {
                [[0.0; 3], [0.0, 1e-12, 1.0 - 1e-12], [0.0; 3]]
            } else {
                [[1e-12, 0.0, 1.0 - 1e-12], [0.0; 3], [0.0; 3]]
            }
        });
        let a = bot(never_ends);
        let config = MatchConfig {
            rally_shot_cap: 10,
            ..MatchConfig::default()
        };
        let score = MatchScore::new(config, Player::A).unwrap();
        let p = play_point(&score, [&a, &a], &mut RandomStream::from_seed(3)).unwrap();
        assert!(p.capped);
        assert_eq!(p.rally_length, 10);
        // the player on turn after 10 shots is the server, so the returner wins
        assert_eq!(p.winner, Player::B);
    }

    #[test]
    fn batch_is_independent_of_parallelism() {
        let avg = bot(PlayerParams::default().profile("avg"));
        let strong = bot(PlayerParams::default().with_edge(0.1).profile("strong"));
        let mut batch = BatchConfig::new(strong, avg, 6, 99);
        let serial = run_batch(&batch).unwrap();
        batch.parallelism = 4;
        let parallel = run_batch(&batch).unwrap();
        assert_eq!(serial.records, parallel.records);
        assert_eq!(serial.summary, parallel.summary);
        assert_eq!(serial.records[1].first_server, Player::B);
        assert_eq!(serial.records[2].match_seed, split_seed(99, 2));
        for r in &serial.records {
            assert!(replay_matches(r));
        }
        let points: u64 = serial.records.iter().map(|r| r.points.len() as u64).sum();
        let s = &serial.summary.sides;
        assert_eq!(s[0].points_won + s[1].points_won, points);
    }

    #[test]
    fn seed_isolation() {
        let avg = bot(PlayerParams::default().profile("avg"));
        let batch = BatchConfig::new(avg.clone(), avg, 3, 5);
        let a = run_batch(&batch).unwrap();
        let mut shifted = batch.clone();
        shifted.n_matches = 4;
        let b = run_batch(&shifted).unwrap();
        assert_eq!(a.records[..], b.records[..3]);
    }

    #[test]
    fn jsonl_round_trip() {
        let avg = bot(PlayerParams::default().profile("avg"));
        let out = run_batch(&BatchConfig::new(avg.clone(), avg, 2, 8)).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&out.records, &mut buf).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 2);
        let back = read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, out.records);
        let bad = b"{\"schema_version\":\"1\"}\n";
        assert!(matches!(read_jsonl(&bad[..]), Err(JsonlError::Parse { line: 1, .. })));
    }

    #[test]
    fn sweep_requires_mcts_side() {
        let avg = bot(PlayerParams::default().profile("avg"));
        let batch = BatchConfig::new(avg.clone(), avg, 1, 0);
        assert!(run_sweep(&batch, Player::A, SweepParam::C, &[1.0]).is_err());
    }

    #[test]
    fn zero_matches_rejected() {
        let avg = bot(PlayerParams::default().profile("avg"));
        let batch = BatchConfig::new(avg.clone(), avg, 0, 0);
        assert!(matches!(run_batch(&batch), Err(SimError::InvalidBatch(_))));
    }
}
