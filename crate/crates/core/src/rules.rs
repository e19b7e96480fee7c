//! Tennis scoring and the rally state machine.
//!
//! [`MatchScore`] is a value: [`MatchScore::apply_point`] returns the
//! successor score. [`RallyState`] tracks one point from the first serve to
//! the point winner.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shot::{Direction, EncodingError, HitterContext, Outcome, ServeNumber, Side};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RulesError {
    #[error("invalid match config: {0}")]
    InvalidConfig(String),
    #[error("the match is already complete")]
    MatchCompleted,
    #[error("the rally is already finished")]
    RallyFinished,
    #[error("illegal direction for this phase of the rally: {0}")]
    IllegalDirection(#[from] EncodingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    A,
    B,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::A => Player::B,
            Player::B => Player::A,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::A => "A",
            Player::B => "B",
        })
    }
}

/// Match format. Defaults to best of three sets, six-game sets with a
/// seven-point tiebreak at 6-6, and advantage scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub sets_to_win: u32,
    pub games_per_set: u32,
    pub tiebreak_at: Option<u32>,
    pub tiebreak_points: u32,
    pub advantage_scoring: bool,
    pub rally_shot_cap: u32,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            sets_to_win: 2,
            games_per_set: 6,
            tiebreak_at: Some(6),
            tiebreak_points: 7,
            advantage_scoring: true,
            rally_shot_cap: 500,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), RulesError> {
        let bad = |m: &str| Err(RulesError::InvalidConfig(m.to_string()));
        if self.sets_to_win == 0 {
            return bad("sets_to_win must be positive");
        }
        if self.games_per_set == 0 {
            return bad("games_per_set must be positive");
        }
        if self.tiebreak_points == 0 {
            return bad("tiebreak_points must be positive");
        }
        if self.rally_shot_cap == 0 {
            return bad("rally_shot_cap must be positive");
        }
        match self.tiebreak_at {
            Some(0) => bad("tiebreak_at must be positive"),
            Some(t) if t > self.games_per_set => bad("tiebreak_at exceeds games_per_set"),
            _ => Ok(()),
        }
    }
}

/// Games of one finished set, with the tiebreak score if it went to one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetScore {
    pub games: [u32; 2],
    pub tiebreak: Option<[u32; 2]>,
}

/// Full match score.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchScore {
    config: MatchConfig,
    sets_won: [u32; 2],
    games: [u32; 2],
    points: [u32; 2],
    in_tiebreak: bool,
    tiebreak_points: [u32; 2],
    server: Player,
    tiebreak_first_server: Option<Player>,
    completed: Option<Player>,
    sets: Vec<SetScore>,
}

impl MatchScore {
    pub fn new(config: MatchConfig, first_server: Player) -> Result<Self, RulesError> {
        config.validate()?;
        Ok(Self {
            config,
            sets_won: [0; 2],
            games: [0; 2],
            points: [0; 2],
            in_tiebreak: false,
            tiebreak_points: [0; 2],
            server: first_server,
            tiebreak_first_server: None,
            completed: None,
            sets: Vec::new(),
        })
    }

    pub fn config(&self) -> &MatchConfig {
        &self.config
    }

    pub fn sets_won(&self) -> [u32; 2] {
        self.sets_won
    }

    pub fn games(&self) -> [u32; 2] {
        self.games
    }

    /// Raw point counts in the current game (0, 1, 2, 3, ... rendered as
    /// 0/15/30/40/Ad).
    pub fn points(&self) -> [u32; 2] {
        self.points
    }

    pub fn in_tiebreak(&self) -> bool {
        self.in_tiebreak
    }

    pub fn tiebreak_points(&self) -> [u32; 2] {
        self.tiebreak_points
    }

    pub fn server(&self) -> Player {
        self.server
    }

    pub fn completed_sets(&self) -> &[SetScore] {
        &self.sets
    }

    pub fn match_winner(&self) -> Option<Player> {
        self.completed
    }

    pub fn is_complete(&self) -> bool {
        self.completed.is_some()
    }

    /// Points played so far in the current game or tiebreak.
    pub fn points_played(&self) -> u32 {
        if self.in_tiebreak {
            self.tiebreak_points[0] + self.tiebreak_points[1]
        } else {
            self.points[0] + self.points[1]
        }
    }

    pub fn serve_side(&self) -> Side {
        Side::from_points_played(self.points_played())
    }

    pub fn apply_point(&self, winner: Player) -> Result<MatchScore, RulesError> {
        if self.completed.is_some() {
            return Err(RulesError::MatchCompleted);
        }
        let mut next = self.clone();
        let w = winner.index();
        let l = winner.other().index();
        if next.in_tiebreak {
            next.tiebreak_points[w] += 1;
            let (mine, theirs) = (next.tiebreak_points[w], next.tiebreak_points[l]);
            if mine >= next.config.tiebreak_points && mine >= theirs + 2 {
                next.finish_set(winner);
            } else if (mine + theirs) % 2 == 1 {
                next.server = next.server.other();
            }
        } else {
            next.points[w] += 1;
            let (mine, theirs) = (next.points[w], next.points[l]);
            let game_won = if next.config.advantage_scoring {
                mine >= 4 && mine >= theirs + 2
            } else {
                mine >= 4
            };
            if game_won {
                next.finish_game(winner);
            }
        }
        Ok(next)
    }

    fn finish_game(&mut self, winner: Player) {
        let w = winner.index();
        let l = winner.other().index();
        self.games[w] += 1;
        self.points = [0; 2];
        if self.games[w] >= self.config.games_per_set && self.games[w] >= self.games[l] + 2 {
            self.finish_set(winner);
            return;
        }
        self.server = self.server.other();
        if let Some(t) = self.config.tiebreak_at {
            if self.games == [t, t] {
                self.in_tiebreak = true;
                self.tiebreak_first_server = Some(self.server);
            }
        }
    }

    fn finish_set(&mut self, winner: Player) {
        let mut games = self.games;
        let tiebreak = if self.in_tiebreak {
            games[winner.index()] += 1;
            Some(self.tiebreak_points)
        } else {
            None
        };
        self.sets.push(SetScore { games, tiebreak });
        self.sets_won[winner.index()] += 1;
        // the receiver of the tiebreak's first point serves the next set
        self.server = match self.tiebreak_first_server.take() {
            Some(first) => first.other(),
            None => self.server.other(),
        };
        self.games = [0; 2];
        self.points = [0; 2];
        self.tiebreak_points = [0; 2];
        self.in_tiebreak = false;
        if self.sets_won[winner.index()] >= self.config.sets_to_win {
            self.completed = Some(winner);
        }
    }

    /// Returns a description of the first violated invariant, if any.
    pub fn check_invariants(&self) -> Result<(), String> {
        let c = &self.config;
        let [pa, pb] = self.points;
        if self.in_tiebreak && (pa, pb) != (0, 0) {
            return Err("game points during a tiebreak".into());
        }
        if c.advantage_scoring {
            if pa.max(pb) > 3 && pa.abs_diff(pb) > 1 {
                return Err(format!("unfinished game at {pa}-{pb}"));
            }
        } else if pa.max(pb) > 3 {
            return Err(format!("unfinished no-ad game at {pa}-{pb}"));
        }
        let [ta, tb] = self.tiebreak_points;
        if !self.in_tiebreak && (ta, tb) != (0, 0) {
            return Err("tiebreak points outside a tiebreak".into());
        }
        if ta.max(tb) >= c.tiebreak_points && ta.abs_diff(tb) >= 2 {
            return Err(format!("unfinished tiebreak at {ta}-{tb}"));
        }
        let [ga, gb] = self.games;
        if ga.max(gb) >= c.games_per_set && ga.abs_diff(gb) >= 2 {
            return Err(format!("unfinished set at {ga}-{gb}"));
        }
        if let Some(t) = c.tiebreak_at {
            if t == c.games_per_set && (ga.max(gb) > t + 1 || (ga == gb && ga > t)) {
                return Err(format!("games {ga}-{gb} beyond tiebreak threshold"));
            }
            if self.in_tiebreak != (ga == t && gb == t) {
                return Err("tiebreak flag disagrees with games".into());
            }
        }
        let won = self.sets_won;
        match self.completed {
            Some(p) if won[p.index()] != c.sets_to_win => return Err("completed without enough sets".into()),
            None if won.iter().any(|&s| s >= c.sets_to_win) => return Err("enough sets but not completed".into()),
            _ => {}
        }
        if won.iter().sum::<u32>() as usize != self.sets.len() {
            return Err("set history disagrees with sets won".into());
        }
        Ok(())
    }

    /// Completed sets from A's point of view, e.g. `6-4 3-6 7-6(5)`; the
    /// parenthesised number is the tiebreak loser's points.
    pub fn render_sets(&self) -> String {
        self.sets
            .iter()
            .map(|s| {
                let base = format!("{}-{}", s.games[0], s.games[1]);
                match s.tiebreak {
                    Some(tb) => format!("{base}({})", tb[0].min(tb[1])),
                    None => base,
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn render_points(&self) -> String {
        if self.in_tiebreak {
            let [a, b] = self.tiebreak_points;
            return format!("TB {a}-{b}");
        }
        let [a, b] = self.points;
        let name = |p: u32| ["0", "15", "30", "40"].get(p as usize).copied().unwrap_or("40");
        if a >= 3 && b >= 3 {
            match a.cmp(&b) {
                std::cmp::Ordering::Equal => "40-40".to_string(),
                std::cmp::Ordering::Greater => "Ad-40".to_string(),
                std::cmp::Ordering::Less => "40-Ad".to_string(),
            }
        } else {
            format!("{}-{}", name(a), name(b))
        }
    }
}

impl fmt::Display for MatchScore {
    /// Finished sets, then (for a live match) current games and points:
    /// `6-4 2-1 30-15`, `6-4 6-6 TB 3-2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let sets = self.render_sets();
        if !sets.is_empty() {
            parts.push(sets);
        }
        if self.completed.is_none() {
            parts.push(format!("{}-{}", self.games[0], self.games[1]));
            parts.push(self.render_points());
        }
        f.write_str(&parts.join(" "))
    }
}

/// One logged shot or serve attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotEntry {
    pub player: Player,
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u8>,
    pub outcome: Outcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RallyEvent {
    Continue { context: HitterContext, hitter: Player },
    SecondServe,
    PointWon(Player),
}

/// One point in progress.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RallyState {
    server: Player,
    serve_number: ServeNumber,
    side: Side,
    hitter: Player,
    previous_direction: Option<Direction>,
    shot_count: u32,
    faults: u32,
    shot_log: Vec<ShotEntry>,
    winner: Option<Player>,
    capped: bool,
}

impl RallyState {
    pub fn new(server: Player, side: Side) -> Self {
        Self {
            server,
            serve_number: ServeNumber::First,
            side,
            hitter: server,
            previous_direction: None,
            shot_count: 0,
            faults: 0,
            shot_log: Vec::new(),
            winner: None,
            capped: false,
        }
    }

    /// A rally that starts at the serve of `score`'s next point.
    pub fn for_point(score: &MatchScore) -> Self {
        Self::new(score.server(), score.serve_side())
    }

    /// A rally positioned mid-point: the serve (`serve_number`) landed in
    /// play in `serve_direction` and, when present, `shots` have followed.
    /// Used to set up search and rollout experiments.
    pub fn mid_rally(
        server: Player,
        side: Side,
        serve_number: ServeNumber,
        serve_direction: Direction,
        shots: &[Direction],
    ) -> Result<Self, RulesError> {
        let mut state = Self::new(server, side);
        if serve_number == ServeNumber::Second {
            state.apply(serve_direction, Outcome::Error)?;
        }
        state.apply(serve_direction, Outcome::InPlay)?;
        for &d in shots {
            state.apply(d, Outcome::InPlay)?;
        }
        Ok(state)
    }

    pub fn server(&self) -> Player {
        self.server
    }

    pub fn returner(&self) -> Player {
        self.server.other()
    }

    pub fn serve_number(&self) -> ServeNumber {
        self.serve_number
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn hitter(&self) -> Player {
        self.hitter
    }

    pub fn previous_direction(&self) -> Option<Direction> {
        self.previous_direction
    }

    /// Shots counted toward rally length: an in-play or winning serve plus
    /// every later shot. Faults are logged but not counted.
    pub fn shot_count(&self) -> u32 {
        self.shot_count
    }

    pub fn faults(&self) -> u32 {
        self.faults
    }

    pub fn shot_log(&self) -> &[ShotEntry] {
        &self.shot_log
    }

    pub fn winner(&self) -> Option<Player> {
        self.winner
    }

    pub fn is_finished(&self) -> bool {
        self.winner.is_some()
    }

    /// Whether the point ended on the shot cap.
    pub fn was_capped(&self) -> bool {
        self.capped
    }

    /// Context of the shot the current hitter is about to play.
    pub fn context(&self) -> Option<HitterContext> {
        if self.winner.is_some() {
            return None;
        }
        Some(match self.previous_direction {
            None => HitterContext::Serve {
                side: self.side,
                serve_number: self.serve_number,
            },
            Some(prev) if prev.is_serve() => HitterContext::Return {
                side: self.side,
                serve_number: self.serve_number,
                serve_direction: prev,
            },
            Some(prev) => HitterContext::Rally {
                hitter_served: self.hitter == self.server,
                serve_number: self.serve_number,
                previous_direction: prev,
            },
        })
    }

    /// Pure transition: the successor state and the event it produced.
    pub fn advance(&self, direction: Direction, outcome: Outcome) -> Result<(RallyState, RallyEvent), RulesError> {
        let mut next = self.clone();
        let event = next.apply(direction, outcome)?;
        Ok((next, event))
    }

    /// In-place form of [`RallyState::advance`].
    pub fn apply(&mut self, direction: Direction, outcome: Outcome) -> Result<RallyEvent, RulesError> {
        self.apply_with_depth(direction, None, outcome)
    }

    pub fn apply_with_depth(
        &mut self,
        direction: Direction,
        depth: Option<u8>,
        outcome: Outcome,
    ) -> Result<RallyEvent, RulesError> {
        let context = self.context().ok_or(RulesError::RallyFinished)?;
        context.check_direction(direction)?;
        let hitter = self.hitter;
        self.shot_log.push(ShotEntry {
            player: hitter,
            direction,
            depth,
            outcome,
        });
        if context.is_serve() {
            match outcome {
                Outcome::Error => {
                    self.faults += 1;
                    if self.serve_number == ServeNumber::First {
                        self.serve_number = ServeNumber::Second;
                        return Ok(RallyEvent::SecondServe);
                    }
                    return Ok(self.finish(self.returner()));
                }
                Outcome::Winner => {
                    self.shot_count += 1;
                    return Ok(self.finish(self.server));
                }
                Outcome::InPlay => {}
            }
        } else {
            match outcome {
                Outcome::Error => {
                    self.shot_count += 1;
                    return Ok(self.finish(hitter.other()));
                }
                Outcome::Winner => {
                    self.shot_count += 1;
                    return Ok(self.finish(hitter));
                }
                Outcome::InPlay => {}
            }
        }
        self.shot_count += 1;
        self.previous_direction = Some(direction);
        self.hitter = hitter.other();
        Ok(RallyEvent::Continue {
            context: self.context().expect("rally continues"),
            hitter: self.hitter,
        })
    }

    fn finish(&mut self, winner: Player) -> RallyEvent {
        self.winner = Some(winner);
        RallyEvent::PointWon(winner)
    }

    /// Ends the point once `cap` counted shots have been played: the player
    /// not on turn wins, as if the hitter committed a forced error.
    pub fn enforce_cap(&mut self, cap: u32) -> Option<Player> {
        if self.winner.is_none() && self.shot_count >= cap {
            self.capped = true;
            let w = self.hitter.other();
            self.winner = Some(w);
            return Some(w);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn play(score: &MatchScore, winners: &[Player]) -> MatchScore {
        winners.iter().fold(score.clone(), |s, &w| s.apply_point(w).unwrap())
    }

    fn new_default() -> MatchScore {
        MatchScore::new(MatchConfig::default(), Player::A).unwrap()
    }

    fn win_game(score: &MatchScore, p: Player) -> MatchScore {
        play(score, &[p; 4])
    }

    #[test]
    fn initial_state() {
        let s = new_default();
        assert_eq!(s.sets_won(), [0, 0]);
        assert_eq!(s.games(), [0, 0]);
        assert_eq!(s.points(), [0, 0]);
        assert_eq!(s.server(), Player::A);
        assert_eq!(s.match_winner(), None);
        assert_eq!(s.to_string(), "0-0 0-0");

        let five = MatchConfig {
            sets_to_win: 3,
            ..MatchConfig::default()
        };
        assert_eq!(MatchScore::new(five, Player::B).unwrap().server(), Player::B);

        let adv_set = MatchConfig {
            tiebreak_at: None,
            ..MatchConfig::default()
        };
        assert!(MatchScore::new(adv_set, Player::A).is_ok());
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            MatchConfig {
                sets_to_win: 0,
                ..Default::default()
            },
            MatchConfig {
                games_per_set: 0,
                ..Default::default()
            },
            MatchConfig {
                tiebreak_at: Some(7),
                ..Default::default()
            },
            MatchConfig {
                tiebreak_points: 0,
                ..Default::default()
            },
            MatchConfig {
                rally_shot_cap: 0,
                ..Default::default()
            },
        ] {
            assert!(MatchScore::new(cfg, Player::A).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn forty_thirty_converts() {
        use Player::*;
        let s = play(&new_default(), &[A, A, B, A, B]);
        assert_eq!(s.points(), [3, 2]);
        assert_eq!(s.to_string(), "0-0 40-30");
        let s = s.apply_point(A).unwrap();
        assert_eq!(s.games(), [1, 0]);
        assert_eq!(s.points(), [0, 0]);
        assert_eq!(s.server(), B);
    }

    #[test]
    fn deuce_and_advantage() {
        use Player::*;
        let deuce = play(&new_default(), &[A, B, A, B, A, B]);
        assert_eq!(deuce.to_string(), "0-0 40-40");
        let ad = deuce.apply_point(A).unwrap();
        assert_eq!(ad.to_string(), "0-0 Ad-40");
        assert_eq!(ad.games(), [0, 0]);
        let back = ad.apply_point(B).unwrap();
        assert_eq!(back.to_string(), "0-0 40-40");
        let ad_b = back.apply_point(B).unwrap();
        assert_eq!(ad_b.to_string(), "0-0 40-Ad");
        let game = ad_b.apply_point(B).unwrap();
        assert_eq!(game.games(), [0, 1]);
    }

    #[test]
    fn no_ad_deciding_point() {
        use Player::*;
        let cfg = MatchConfig {
            advantage_scoring: false,
            ..Default::default()
        };
        let s = play(&MatchScore::new(cfg, A).unwrap(), &[A, B, A, B, A, B, B]);
        assert_eq!(s.games(), [0, 1]);
    }

    #[test]
    fn set_needs_two_game_lead() {
        let mut s = new_default();
        for _ in 0..5 {
            s = win_game(&s, Player::A);
            s = win_game(&s, Player::B);
        }
        assert_eq!(s.games(), [5, 5]);
        s = win_game(&s, Player::A);
        assert_eq!(s.games(), [6, 5]);
        assert_eq!(s.sets_won(), [0, 0]);
        s = win_game(&s, Player::A);
        assert_eq!(s.sets_won(), [1, 0]);
        assert_eq!(s.games(), [0, 0]);
        assert_eq!(s.render_sets(), "7-5");
    }

    #[test]
    fn tiebreak_entry_rotation_and_exit() {
        use Player::*;
        let mut s = new_default();
        for _ in 0..6 {
            s = win_game(&s, A);
            s = win_game(&s, B);
        }
        assert!(s.in_tiebreak());
        assert_eq!(s.games(), [6, 6]);
        // twelve games played: A served games 1,3,..,11 so A serves first in the tiebreak
        assert_eq!(s.server(), A);
        let mut servers = vec![s.server()];
        // tiebreak to 7-5 for A
        let seq = [A, B, A, B, A, B, A, B, A, B, A, A];
        for (i, &w) in seq.iter().enumerate() {
            s = s.apply_point(w).unwrap();
            if i + 1 < seq.len() {
                servers.push(s.server());
                assert!(s.in_tiebreak());
            }
        }
        assert_eq!(servers, vec![A, B, B, A, A, B, B, A, A, B, B, A]);
        assert!(!s.in_tiebreak());
        assert_eq!(s.sets_won(), [1, 0]);
        assert_eq!(s.render_sets(), "7-6(5)");
        // B received first in the tiebreak, so B serves the next set
        assert_eq!(s.server(), B);
    }

    #[test]
    fn tiebreak_side_parity() {
        use Player::*;
        let mut s = new_default();
        for _ in 0..6 {
            s = win_game(&s, A);
            s = win_game(&s, B);
        }
        s = play(&s, &[A, B, A, B, A]);
        assert_eq!(s.tiebreak_points(), [3, 2]);
        assert_eq!(s.serve_side(), Side::Advantage);
        assert_eq!(s.to_string(), "6-6 TB 3-2");
    }

    #[test]
    fn serve_side_by_parity() {
        let s = new_default();
        assert_eq!(s.serve_side(), Side::Deuce);
        let s = s.apply_point(Player::A).unwrap();
        assert_eq!(s.serve_side(), Side::Advantage);
    }

    #[test]
    fn match_completion() {
        let mut s = new_default();
        for _ in 0..12 {
            s = win_game(&s, Player::A);
        }
        assert_eq!(s.match_winner(), Some(Player::A));
        assert_eq!(s.to_string(), "6-0 6-0");
        assert_eq!(s.apply_point(Player::A), Err(RulesError::MatchCompleted));

        let cfg = MatchConfig {
            sets_to_win: 3,
            ..Default::default()
        };
        let mut s = MatchScore::new(cfg, Player::A).unwrap();
        let set = |s: &MatchScore, p| (0..6).fold(s.clone(), |s, _| win_game(&s, p));
        s = set(&s, Player::A);
        s = set(&s, Player::B);
        assert_eq!(s.sets_won(), [1, 1]);
        assert_eq!(s.match_winner(), None);
        s = set(&s, Player::A);
        s = set(&s, Player::A);
        assert_eq!(s.sets_won(), [3, 1]);
        assert_eq!(s.match_winner(), Some(Player::A));
    }

    #[test]
    fn advantage_final_set_never_tiebreaks() {
        let cfg = MatchConfig {
            tiebreak_at: None,
            sets_to_win: 1,
            ..Default::default()
        };
        let mut s = MatchScore::new(cfg, Player::A).unwrap();
        for _ in 0..8 {
            s = win_game(&s, Player::A);
            s = win_game(&s, Player::B);
        }
        assert!(!s.in_tiebreak());
        assert_eq!(s.games(), [8, 8]);
        s = win_game(&s, Player::B);
        s = win_game(&s, Player::B);
        assert_eq!(s.match_winner(), Some(Player::B));
        assert_eq!(s.render_sets(), "8-10");
    }

    #[test]
    fn first_serve_fault_then_double_fault() {
        let r = RallyState::new(Player::A, Side::Deuce);
        let (r, ev) = r.advance(Direction::WIDE, Outcome::Error).unwrap();
        assert_eq!(ev, RallyEvent::SecondServe);
        assert_eq!(r.serve_number(), ServeNumber::Second);
        assert_eq!(r.shot_count(), 0);
        assert_eq!(r.shot_log().len(), 1);
        assert_eq!(
            r.context(),
            Some(HitterContext::Serve {
                side: Side::Deuce,
                serve_number: ServeNumber::Second
            })
        );
        let (r, ev) = r.advance(Direction::T, Outcome::Error).unwrap();
        assert_eq!(ev, RallyEvent::PointWon(Player::B));
        assert_eq!(r.shot_count(), 0);
        assert_eq!(r.shot_log().len(), 2);
        assert_eq!(r.advance(Direction::T, Outcome::Error), Err(RulesError::RallyFinished));
    }

    #[test]
    fn ace_is_one_shot() {
        let r = RallyState::new(Player::B, Side::Advantage);
        let (r, ev) = r.advance(Direction::T, Outcome::Winner).unwrap();
        assert_eq!(ev, RallyEvent::PointWon(Player::B));
        assert_eq!(r.shot_count(), 1);
    }

    #[test]
    fn serve_in_play_gives_return_context() {
        let r = RallyState::new(Player::A, Side::Deuce);
        let (_, ev) = r.advance(Direction::BODY, Outcome::InPlay).unwrap();
        assert_eq!(
            ev,
            RallyEvent::Continue {
                context: HitterContext::Return {
                    side: Side::Deuce,
                    serve_number: ServeNumber::First,
                    serve_direction: Direction::BODY
                },
                hitter: Player::B
            }
        );
    }

    #[test]
    fn rally_shot_carries_previous_direction() {
        let r = RallyState::mid_rally(
            Player::A,
            Side::Deuce,
            ServeNumber::Second,
            Direction::WIDE,
            &[Direction::FOREHAND_SIDE],
        )
        .unwrap();
        // the server hits the third shot
        assert_eq!(r.hitter(), Player::A);
        let (r, ev) = r.advance(Direction::BACKHAND_SIDE, Outcome::InPlay).unwrap();
        assert_eq!(
            ev,
            RallyEvent::Continue {
                context: HitterContext::Rally {
                    hitter_served: false,
                    serve_number: ServeNumber::Second,
                    previous_direction: Direction::BACKHAND_SIDE
                },
                hitter: Player::B
            }
        );
        assert_eq!(r.shot_count(), 3);
        assert_eq!(r.faults(), 1);
        assert_eq!(r.shot_log().len(), 4);
    }

    #[test]
    fn rally_terminals() {
        let r = RallyState::mid_rally(Player::A, Side::Deuce, ServeNumber::First, Direction::T, &[]).unwrap();
        let (_, ev) = r.advance(Direction::MIDDLE, Outcome::Error).unwrap();
        assert_eq!(ev, RallyEvent::PointWon(Player::A));
        let (_, ev) = r.advance(Direction::MIDDLE, Outcome::Winner).unwrap();
        assert_eq!(ev, RallyEvent::PointWon(Player::B));
    }

    #[test]
    fn phase_checks() {
        let r = RallyState::new(Player::A, Side::Deuce);
        assert!(matches!(
            r.advance(Direction::MIDDLE, Outcome::InPlay),
            Err(RulesError::IllegalDirection(_))
        ));
        let (r, _) = r.advance(Direction::WIDE, Outcome::InPlay).unwrap();
        assert!(r.advance(Direction::WIDE, Outcome::InPlay).is_err());
    }

    #[test]
    fn cap_awards_point_to_player_not_on_turn() {
        let mut r = RallyState::mid_rally(Player::A, Side::Deuce, ServeNumber::First, Direction::T, &[]).unwrap();
        assert_eq!(r.enforce_cap(2), None);
        r.apply(Direction::MIDDLE, Outcome::InPlay).unwrap();
        assert_eq!(r.hitter(), Player::A);
        assert_eq!(r.enforce_cap(2), Some(Player::B));
        assert!(r.was_capped());
    }
}
