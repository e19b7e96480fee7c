use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::parse::{parse_point, ParsedRally, ServeTerminal, ShotTerminal};
use super::{IngestError, RallyRow, RowError};
use crate::shot::{Direction, HitterContext, Outcome, SkillProfile, CONTEXT_COUNT};

/// One shot attributed to a player and a context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassifiedShot {
    pub hitter: String,
    pub context: HitterContext,
    pub direction: Direction,
    pub outcome: Outcome,
    /// Shot-type letter; `None` for serves.
    pub shot_type: Option<char>,
}

/// Maps every serve attempt and shot of a parsed rally to its context.
///
/// Shot `k` (0-indexed after the serve) is hit by the server iff `k` is odd.
pub fn classify_shots(rally: &ParsedRally, row: &RallyRow) -> Vec<ClassifiedShot> {
    let mut out = Vec::with_capacity(rally.serves.len() + rally.shots.len());
    for serve in &rally.serves {
        out.push(ClassifiedShot {
            hitter: row.server_name.clone(),
            context: HitterContext::Serve {
                side: row.side,
                serve_number: serve.number,
            },
            direction: serve.direction,
            outcome: match serve.terminal {
                ServeTerminal::Fault => Outcome::Error,
                ServeTerminal::Ace => Outcome::Winner,
                ServeTerminal::InPlay => Outcome::InPlay,
            },
            shot_type: None,
        });
    }
    let Some(serve) = rally.landed_serve() else {
        return out;
    };
    let mut previous = serve.direction;
    for (k, shot) in rally.shots.iter().enumerate() {
        let hitter_served = k % 2 == 1;
        let context = if k == 0 {
            HitterContext::Return {
                side: row.side,
                serve_number: serve.number,
                serve_direction: serve.direction,
            }
        } else {
            HitterContext::Rally {
                hitter_served,
                serve_number: serve.number,
                previous_direction: previous,
            }
        };
        out.push(ClassifiedShot {
            hitter: if hitter_served {
                row.server_name.clone()
            } else {
                row.returner_name.clone()
            },
            context,
            direction: shot.direction,
            outcome: match shot.terminal {
                ShotTerminal::Error => Outcome::Error,
                ShotTerminal::Winner => Outcome::Winner,
                ShotTerminal::InPlay => Outcome::InPlay,
            },
            shot_type: Some(shot.shot_type),
        });
        previous = shot.direction;
    }
    out
}

/// Whose shots feed a profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlayerFilter {
    /// Every shot of every rally.
    All,
    /// Only the named player's own shots.
    Player(String),
    /// Every shot of rallies the named player took part in, both sides.
    RalliesOf(String),
}

impl PlayerFilter {
    fn describe(&self) -> String {
        match self {
            PlayerFilter::All => "all players".to_string(),
            PlayerFilter::Player(p) => format!("player {p}"),
            PlayerFilter::RalliesOf(p) => format!("rallies of {p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Exclude non-groundstroke shot types from the counts.
    pub strict_shot_types: bool,
}

/// Groundstroke letters; every other type counts as a special shot.
pub fn is_groundstroke(shot_type: char) -> bool {
    matches!(shot_type, 'f' | 'b')
}

/// Coarse category of a shot-type letter.
pub fn shot_category(shot_type: char) -> &'static str {
    match shot_type {
        'f' | 'b' => "normal",
        'r' | 's' => "slice",
        'v' | 'z' | 'h' | 'i' | 'j' | 'k' => "volley",
        'u' | 'y' => "drop",
        'l' | 'm' => "lob",
        _ => "other",
    }
}

/// Per-context (direction, outcome) counts plus corpus bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTables {
    pub label: String,
    counts: [[[u64; 3]; 3]; CONTEXT_COUNT],
    pub rally_count: u64,
    pub skipped_rallies: u64,
    pub classified_shots: u64,
    pub shot_type_histogram: BTreeMap<char, u64>,
    pub player_share: BTreeMap<String, u64>,
}

impl CountTables {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            counts: [[[0; 3]; 3]; CONTEXT_COUNT],
            rally_count: 0,
            skipped_rallies: 0,
            classified_shots: 0,
            shot_type_histogram: BTreeMap::new(),
            player_share: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, context: &HitterContext, direction: Direction, outcome: Outcome, n: u64) {
        self.counts[context.index()][direction.slot()][outcome.index()] += n;
        self.classified_shots += n;
    }

    pub fn cells(&self, context: &HitterContext) -> &[[u64; 3]; 3] {
        &self.counts[context.index()]
    }

    pub fn context_total(&self, context: &HitterContext) -> u64 {
        self.counts[context.index()].iter().flatten().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().sum()
    }

    /// Cell-wise sum. Associative and commutative, so shards can be merged
    /// in any order.
    pub fn merge(&mut self, other: &CountTables) {
        for (a, b) in self
            .counts
            .iter_mut()
            .flatten()
            .flatten()
            .zip(other.counts.iter().flatten().flatten())
        {
            *a += b;
        }
        self.rally_count += other.rally_count;
        self.skipped_rallies += other.skipped_rallies;
        self.classified_shots += other.classified_shots;
        for (k, v) in &other.shot_type_histogram {
            *self.shot_type_histogram.entry(*k).or_default() += v;
        }
        for (k, v) in &other.player_share {
            *self.player_share.entry(k.clone()).or_default() += v;
        }
    }
}

/// Share of one player in the corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerShare {
    pub player: String,
    pub rallies: u64,
    pub share_percent: f64,
}

/// Summary of one ingest run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rallies: u64,
    pub skipped: u64,
    pub classified_shots: u64,
    pub shot_type_histogram: BTreeMap<String, u64>,
    /// Percent of shots per category (normal, slice, volley, drop, lob, other).
    pub shot_type_share: BTreeMap<String, f64>,
    /// Top ten players then "Others"; shares are of player-rally credits
    /// (each rally credits both players).
    pub player_share: Vec<PlayerShare>,
    /// First few parse failures, for diagnosis.
    pub sample_errors: Vec<String>,
}

const SAMPLE_ERRORS: usize = 10;

impl IngestReport {
    pub fn from_counts(counts: &CountTables, sample_errors: Vec<String>) -> Self {
        let shots: u64 = counts.shot_type_histogram.values().sum();
        let mut share = BTreeMap::new();
        for (&t, &n) in &counts.shot_type_histogram {
            *share.entry(shot_category(t).to_string()).or_insert(0.0) += n as f64;
        }
        for v in share.values_mut() {
            *v = if shots > 0 { *v * 100.0 / shots as f64 } else { 0.0 };
        }
        let credits: u64 = counts.player_share.values().sum();
        let pct = |n: u64| {
            if credits > 0 {
                n as f64 * 100.0 / credits as f64
            } else {
                0.0
            }
        };
        let mut ranked: Vec<_> = counts.player_share.iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        let mut player_share: Vec<PlayerShare> = ranked
            .iter()
            .take(10)
            .map(|(p, &n)| PlayerShare {
                player: (*p).clone(),
                rallies: n,
                share_percent: pct(n),
            })
            .collect();
        if ranked.len() > 10 {
            let rest: u64 = ranked[10..].iter().map(|(_, &n)| n).sum();
            player_share.push(PlayerShare {
                player: "Others".to_string(),
                rallies: rest,
                share_percent: pct(rest),
            });
        }
        Self {
            rallies: counts.rally_count,
            skipped: counts.skipped_rallies,
            classified_shots: counts.classified_shots,
            shot_type_histogram: counts
                .shot_type_histogram
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            shot_type_share: share,
            player_share,
            sample_errors,
        }
    }

    /// Percent of shots that are plain groundstrokes.
    pub fn normal_share(&self) -> f64 {
        self.shot_type_share.get("normal").copied().unwrap_or(0.0)
    }
}

/// Accumulates a stream of rows into count tables. Unreadable or
/// unparseable rows are counted as skipped.
pub fn ingest_corpus<I>(rows: I, filter: &PlayerFilter, options: IngestOptions) -> (CountTables, IngestReport)
where
    I: IntoIterator<Item = Result<RallyRow, RowError>>,
{
    let mut counts = CountTables::new(filter.describe());
    let mut errors = Vec::new();
    for row in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                counts.skipped_rallies += 1;
                if errors.len() < SAMPLE_ERRORS {
                    errors.push(e.to_string());
                }
                continue;
            }
        };
        let target = match filter {
            PlayerFilter::All => None,
            PlayerFilter::Player(p) | PlayerFilter::RalliesOf(p) => {
                if &row.server_name != p && &row.returner_name != p {
                    continue;
                }
                Some(p)
            }
        };
        let rally = match parse_point(&row.first_serve, row.second_serve.as_deref()) {
            Ok(r) => r,
            Err(e) => {
                counts.skipped_rallies += 1;
                if errors.len() < SAMPLE_ERRORS {
                    errors.push(format!("{} line {}: {e}", row.match_id, row.line));
                }
                continue;
            }
        };
        counts.rally_count += 1;
        *counts.player_share.entry(row.server_name.clone()).or_default() += 1;
        *counts.player_share.entry(row.returner_name.clone()).or_default() += 1;
        for shot in classify_shots(&rally, &row) {
            if let (PlayerFilter::Player(_), Some(p)) = (filter, target) {
                if &shot.hitter != p {
                    continue;
                }
            }
            if let Some(t) = shot.shot_type {
                *counts.shot_type_histogram.entry(t).or_default() += 1;
                if options.strict_shot_types && !is_groundstroke(t) {
                    continue;
                }
            }
            counts.add(&shot.context, shot.direction, shot.outcome, 1);
        }
    }
    let report = IngestReport::from_counts(&counts, errors);
    (counts, report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothing {
    None,
    /// Add `alpha` to each of the nine cells of every context.
    Laplace(f64),
}

impl Smoothing {
    pub fn parse(s: &str) -> Option<Smoothing> {
        match s.trim() {
            "none" => Some(Smoothing::None),
            other => {
                let alpha: f64 = other.strip_prefix("laplace:")?.parse().ok()?;
                (alpha.is_finite() && alpha > 0.0).then_some(Smoothing::Laplace(alpha))
            }
        }
    }
}

/// Turns counts into joint probabilities: `(count + alpha) / (total + 9 alpha)`.
pub fn finalize_profile(counts: &CountTables, smoothing: Smoothing) -> Result<SkillProfile, IngestError> {
    let alpha = match smoothing {
        Smoothing::None => 0.0,
        Smoothing::Laplace(a) => a,
    };
    let provenance = format!(
        "{}; rallies={}; shots={}; smoothing={}",
        counts.label,
        counts.rally_count,
        counts.classified_shots,
        match smoothing {
            Smoothing::None => "none".to_string(),
            Smoothing::Laplace(a) => format!("laplace:{a}"),
        }
    );
    let mut profile = SkillProfile::empty(provenance);
    for ctx in HitterContext::all() {
        let cells = counts.cells(&ctx);
        let total = counts.context_total(&ctx);
        if alpha == 0.0 {
            if total == 0 {
                return Err(IngestError::EmptyContext(ctx));
            }
            let terminal: u64 = cells.iter().map(|r| r[0] + r[1]).sum();
            if terminal == 0 {
                return Err(IngestError::NoTerminalObservations(ctx));
            }
        }
        let denom = total as f64 + 9.0 * alpha;
        profile.set_table(ctx, cells.map(|row| row.map(|c| (c as f64 + alpha) / denom)));
    }
    debug_assert!(profile.validate().is_valid());
    Ok(profile)
}
