//! Evaluation artifacts computed from match records: win rates, rally-length
//! distributions, shot patterns and sweep tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::Player;
use crate::shot::{Direction, ServeNumber, Side};
use crate::sim::{BatchSummary, MatchRecord, PointRecord};

/// Lengths 1..=16 get their own bin; longer rallies share an overflow bin.
pub const HISTOGRAM_CAP: usize = 16;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("no records to analyze")]
    Empty,
    #[error("histograms have different binning ({0} vs {1} bins)")]
    BinningMismatch(usize, usize),
    #[error("k must be at least 1")]
    ZeroK,
}

/// Wilson score interval for `k` successes in `n` trials, as fractions.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> Option<(f64, f64)> {
    if n == 0 || k > n {
        return None;
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Some(((center - half).max(0.0), (center + half).min(1.0)))
}

fn percent(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * k as f64 / n as f64
    }
}

fn percent_ci(k: u64, n: u64) -> [f64; 2] {
    let (lo, hi) = wilson_interval(k, n, Z_95).unwrap_or((0.0, 1.0));
    [100.0 * lo, 100.0 * hi]
}

/// Win counts and rates for one side. Rates and intervals are percentages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideSummary {
    pub label: String,
    pub points_won: u64,
    pub points_played: u64,
    pub point_win_rate: f64,
    pub point_win_ci: [f64; 2],
    pub matches_won: u64,
    pub matches_played: u64,
    pub match_win_rate: f64,
    pub match_win_ci: [f64; 2],
}

impl SideSummary {
    pub fn from_counts(
        label: impl Into<String>,
        points_won: u64,
        points_played: u64,
        matches_won: u64,
        matches_played: u64,
    ) -> Self {
        Self {
            label: label.into(),
            points_won,
            points_played,
            point_win_rate: percent(points_won, points_played),
            point_win_ci: percent_ci(points_won, points_played),
            matches_won,
            matches_played,
            match_win_rate: percent(matches_won, matches_played),
            match_win_ci: percent_ci(matches_won, matches_played),
        }
    }
}

/// Point and match win summaries for A and B. Empty input yields zero
/// counts; see [`summarize`] for the checked form.
pub fn win_summary(records: &[MatchRecord], labels: [String; 2]) -> [SideSummary; 2] {
    let mut points = [0u64; 2];
    let mut matches = [0u64; 2];
    for r in records {
        matches[r.winner.index()] += 1;
        for p in &r.points {
            points[p.winner.index()] += 1;
        }
    }
    let total_points = points[0] + points[1];
    let total_matches = records.len() as u64;
    let [la, lb] = labels;
    [
        SideSummary::from_counts(la, points[0], total_points, matches[0], total_matches),
        SideSummary::from_counts(lb, points[1], total_points, matches[1], total_matches),
    ]
}

/// [`win_summary`] with labels taken from the records.
pub fn summarize(records: &[MatchRecord]) -> Result<[SideSummary; 2], AnalyticsError> {
    let first = records.first().ok_or(AnalyticsError::Empty)?;
    Ok(win_summary(records, [first.agent_a.clone(), first.agent_b.clone()]))
}

/// Share of points per rally length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Percentages for lengths 1..=16, then the overflow bin.
    pub percent: Vec<f64>,
    /// Raw counts in the same layout; empty for histograms built from
    /// published percentages.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counts: Vec<u64>,
    pub total: u64,
    /// Double faults (length 0) are not binned.
    #[serde(default)]
    pub double_faults: u64,
}

impl Histogram {
    pub fn from_lengths(lengths: impl IntoIterator<Item = u32>) -> Result<Histogram, AnalyticsError> {
        let mut counts = vec![0u64; HISTOGRAM_CAP + 1];
        let mut double_faults = 0;
        for len in lengths {
            match len as usize {
                0 => double_faults += 1,
                l if l <= HISTOGRAM_CAP => counts[l - 1] += 1,
                _ => counts[HISTOGRAM_CAP] += 1,
            }
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(AnalyticsError::Empty);
        }
        Ok(Histogram {
            percent: counts.iter().map(|&c| percent(c, total)).collect(),
            counts,
            total,
            double_faults,
        })
    }

    pub fn from_percentages(percent: Vec<f64>) -> Histogram {
        Histogram {
            percent,
            counts: Vec::new(),
            total: 0,
            double_faults: 0,
        }
    }

    /// Bin label: the rally length, or `17+` for overflow.
    pub fn bin_label(&self, bin: usize) -> String {
        if bin + 1 == self.percent.len() && self.percent.len() == HISTOGRAM_CAP + 1 {
            format!("{}+", HISTOGRAM_CAP + 1)
        } else {
            (bin + 1).to_string()
        }
    }

    /// Most common rally length (1-based bin).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.percent.iter().enumerate() {
            if p > self.percent[best] {
                best = i;
            }
        }
        best + 1
    }
}

/// Rally-length histogram over every point of every record (ace = 1).
pub fn rally_length_distribution(records: &[MatchRecord]) -> Result<Histogram, AnalyticsError> {
    Histogram::from_lengths(records.iter().flat_map(|r| r.points.iter().map(|p| p.rally_length)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramDistance {
    /// Sum of absolute bin differences, in percentage points.
    pub l1: f64,
    /// 1-based bin of the largest absolute difference (first on ties).
    pub max_gap_bin: usize,
    pub max_gap: f64,
}

pub fn histogram_distance(h1: &Histogram, h2: &Histogram) -> Result<HistogramDistance, AnalyticsError> {
    if h1.percent.len() != h2.percent.len() {
        return Err(AnalyticsError::BinningMismatch(h1.percent.len(), h2.percent.len()));
    }
    let mut l1 = 0.0;
    let mut max_gap = 0.0;
    let mut max_gap_bin = 1;
    for (i, (a, b)) in h1.percent.iter().zip(&h2.percent).enumerate() {
        let gap = (a - b).abs();
        l1 += gap;
        if gap > max_gap {
            max_gap = gap;
            max_gap_bin = i + 1;
        }
    }
    Ok(HistogramDistance {
        l1,
        max_gap_bin,
        max_gap,
    })
}

/// Serving side and the serve that landed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub side: Side,
    pub serve_number: ServeNumber,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario {
            side: Side::Deuce,
            serve_number: ServeNumber::First,
        },
        Scenario {
            side: Side::Advantage,
            serve_number: ServeNumber::First,
        },
        Scenario {
            side: Side::Deuce,
            serve_number: ServeNumber::Second,
        },
        Scenario {
            side: Side::Advantage,
            serve_number: ServeNumber::Second,
        },
    ];

    pub fn name(&self) -> &'static str {
        match (self.side, self.serve_number) {
            (Side::Deuce, ServeNumber::First) => "first_serve_deuce",
            (Side::Advantage, ServeNumber::First) => "first_serve_advantage",
            (Side::Deuce, ServeNumber::Second) => "second_serve_deuce",
            (Side::Advantage, ServeNumber::Second) => "second_serve_advantage",
        }
    }
}

/// A direction prefix of up to three shots. `None` is a wildcard.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotPattern {
    pub pattern: String,
    pub directions: Vec<Option<Direction>>,
    pub frequency: u64,
    pub wins: u64,
    pub point_win_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPatterns {
    pub scenario: Scenario,
    /// Points the agent served with this serve landing in this scenario.
    pub served_points: u64,
    /// Points lost to a double fault on this side (second-serve scenarios).
    pub double_faults: u64,
    pub patterns: Vec<ShotPattern>,
}

fn render_pattern(dirs: &[Option<Direction>]) -> String {
    dirs.iter()
        .map(|d| d.map_or("*".to_string(), |d| d.code().to_string()))
        .collect::<Vec<_>>()
        .join("-")
}

fn point_prefix(point: &PointRecord, wildcard_return: bool) -> Vec<Option<Direction>> {
    point
        .counted_shots()
        .iter()
        .take(3)
        .enumerate()
        .map(|(i, s)| {
            if wildcard_return && i == 1 {
                None
            } else {
                Some(s.direction)
            }
        })
        .collect()
}

/// (directions, frequency, wins) for one pattern key.
type Tally = (Vec<Option<Direction>>, u64, u64);

/// The `k` most frequent direction prefixes per scenario among points
/// `agent` served, ranked by frequency then by direction codes. With
/// `wildcard_return` the return direction is not distinguished.
pub fn top_patterns(
    records: &[MatchRecord],
    agent: Player,
    k: usize,
    wildcard_return: bool,
) -> Result<Vec<ScenarioPatterns>, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    if k == 0 {
        return Err(AnalyticsError::ZeroK);
    }
    let mut tallies: BTreeMap<Scenario, BTreeMap<Vec<u8>, Tally>> = BTreeMap::new();
    let mut served = BTreeMap::<Scenario, u64>::new();
    let mut double_faults = BTreeMap::<Scenario, u64>::new();
    for point in records.iter().flat_map(|r| &r.points).filter(|p| p.server == agent) {
        let scenario = Scenario {
            side: point.side,
            serve_number: if point.second_serve {
                ServeNumber::Second
            } else {
                ServeNumber::First
            },
        };
        if point.is_double_fault() {
            *double_faults.entry(scenario).or_default() += 1;
            continue;
        }
        *served.entry(scenario).or_default() += 1;
        let dirs = point_prefix(point, wildcard_return);
        let key: Vec<u8> = dirs.iter().map(|d| d.map_or(0, Direction::code)).collect();
        let entry = tallies
            .entry(scenario)
            .or_default()
            .entry(key)
            .or_insert_with(|| (dirs, 0, 0));
        entry.1 += 1;
        if point.winner == agent {
            entry.2 += 1;
        }
    }
    Ok(Scenario::ALL
        .iter()
        .map(|&scenario| {
            let mut patterns: Vec<(Vec<u8>, ShotPattern)> = tallies
                .remove(&scenario)
                .unwrap_or_default()
                .into_iter()
                .map(|(key, (dirs, frequency, wins))| {
                    (
                        key,
                        ShotPattern {
                            pattern: render_pattern(&dirs),
                            directions: dirs,
                            frequency,
                            wins,
                            point_win_rate: percent(wins, frequency),
                        },
                    )
                })
                .collect();
            patterns.sort_by(|(ka, a), (kb, b)| b.frequency.cmp(&a.frequency).then_with(|| ka.cmp(kb)));
            ScenarioPatterns {
                scenario,
                served_points: served.get(&scenario).copied().unwrap_or(0),
                double_faults: double_faults.get(&scenario).copied().unwrap_or(0),
                patterns: patterns.into_iter().take(k).map(|(_, p)| p).collect(),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub point_win_rate: f64,
    pub match_win_rate: f64,
    pub point_win_ci: [f64; 2],
    pub match_win_ci: [f64; 2],
    pub matches: u64,
}

/// One row per labeled batch, reporting `side`.
pub fn sweep_report(batches: &[(String, BatchSummary)], side: Player) -> Vec<SweepRow> {
    batches
        .iter()
        .map(|(label, summary)| {
            let s = &summary.sides[side.index()];
            SweepRow {
                label: label.clone(),
                point_win_rate: s.point_win_rate,
                match_win_rate: s.match_win_rate,
                point_win_ci: s.point_win_ci,
                match_win_ci: s.match_win_ci,
                matches: s.matches_played,
            }
        })
        .collect()
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

pub fn histogram_csv(h: &Histogram) -> String {
    let rows = (0..h.percent.len())
        .map(|i| {
            vec![
                h.bin_label(i),
                h.counts.get(i).map_or(String::new(), u64::to_string),
                num(h.percent[i]),
            ]
        })
        .collect();
    csv_string(&["rally_length", "count", "percent"], rows)
}

pub fn win_summary_csv(sides: &[SideSummary; 2]) -> String {
    let rows = sides
        .iter()
        .zip(["A", "B"])
        .map(|(s, side)| {
            vec![
                side.to_string(),
                s.label.clone(),
                s.points_won.to_string(),
                s.points_played.to_string(),
                num(s.point_win_rate),
                num(s.point_win_ci[0]),
                num(s.point_win_ci[1]),
                s.matches_won.to_string(),
                s.matches_played.to_string(),
                num(s.match_win_rate),
                num(s.match_win_ci[0]),
                num(s.match_win_ci[1]),
            ]
        })
        .collect();
    csv_string(
        &[
            "side",
            "label",
            "points_won",
            "points_played",
            "point_win_rate",
            "point_ci_low",
            "point_ci_high",
            "matches_won",
            "matches_played",
            "match_win_rate",
            "match_ci_low",
            "match_ci_high",
        ],
        rows,
    )
}

pub fn patterns_csv(scenarios: &[ScenarioPatterns]) -> String {
    let mut rows = Vec::new();
    for s in scenarios {
        for (rank, p) in s.patterns.iter().enumerate() {
            rows.push(vec![
                s.scenario.name().to_string(),
                (rank + 1).to_string(),
                p.pattern.clone(),
                p.frequency.to_string(),
                p.wins.to_string(),
                num(p.point_win_rate),
                s.served_points.to_string(),
            ]);
        }
    }
    csv_string(
        &[
            "scenario",
            "rank",
            "pattern",
            "frequency",
            "wins",
            "point_win_rate",
            "served_points",
        ],
        rows,
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                num(r.point_win_rate),
                num(r.match_win_rate),
                num(r.point_win_ci[0]),
                num(r.point_win_ci[1]),
                num(r.match_win_ci[0]),
                num(r.match_win_ci[1]),
                r.matches.to_string(),
            ]
        })
        .collect();
    csv_string(
        &[
            "label",
            "point_win_rate",
            "match_win_rate",
            "point_ci_low",
            "point_ci_high",
            "match_ci_low",
            "match_ci_high",
            "matches",
        ],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::MatchConfig;
    use crate::shot::{HitterContext, Outcome};
    use crate::sim::ShotRecord;

    fn shot(hitter: Player, direction: Direction, outcome: Outcome) -> ShotRecord {
        ShotRecord {
            hitter,
            context: HitterContext::Serve {
                side: Side::Deuce,
                serve_number: ServeNumber::First,
            },
            direction,
            depth: None,
            outcome,
        }
    }

    fn point(server: Player, side: Side, dirs: &[u8], winner: Player) -> PointRecord {
        let shots = dirs
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let hitter = if i % 2 == 0 { server } else { server.other() };
                let outcome = if i + 1 == dirs.len() {
                    Outcome::Winner
                } else {
                    Outcome::InPlay
                };
                shot(hitter, Direction::from_code(d).unwrap(), outcome)
            })
            .collect();
        PointRecord {
            score_before: String::new(),
            server,
            side,
            second_serve: false,
            shots,
            rally_length: dirs.len() as u32,
            winner,
            capped: false,
        }
    }

    fn record(points: Vec<PointRecord>, winner: Player) -> MatchRecord {
        MatchRecord {
            schema_version: "1".into(),
            match_index: 0,
            match_seed: 0,
            agent_a: "a".into(),
            agent_b: "b".into(),
            first_server: Player::A,
            match_config: MatchConfig::default(),
            final_score: String::new(),
            winner,
            points,
        }
    }

    #[test]
    fn wilson_matches_reference() {
        // k=7, n=10: (0.396778, 0.892209)
        let (lo, hi) = wilson_interval(7, 10, Z_95).unwrap();
        assert!(
            (lo - 0.396_778).abs() < 1e-6 && (hi - 0.892_209).abs() < 1e-5,
            "{lo} {hi}"
        );
        let (lo, hi) = wilson_interval(0, 5, Z_95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.4 && hi < 0.5);
        assert!(wilson_interval(1, 0, Z_95).is_none());
    }

    #[test]
    fn half_width_at_two_hundred() {
        let s = SideSummary::from_counts("x", 0, 0, 140, 200);
        let half = (s.match_win_ci[1] - s.match_win_ci[0]) / 2.0;
        assert!((half - 6.3).abs() < 0.2, "{half}");
    }

    #[test]
    fn published_table_rows_round_trip() {
        for (points, matches) in [(5199u64, 142u64), (4965, 93)] {
            let s = SideSummary::from_counts("mcts", points, 10_000, matches, 200);
            let o = SideSummary::from_counts("bot", 10_000 - points, 10_000, 200 - matches, 200);
            assert!((s.point_win_rate + o.point_win_rate - 100.0).abs() < 1e-9);
            assert!((s.match_win_rate + o.match_win_rate - 100.0).abs() < 1e-9);
        }
        let s = SideSummary::from_counts("mcts", 5199, 10_000, 142, 200);
        assert!((s.point_win_rate - 51.99).abs() < 1e-9 && (s.match_win_rate - 71.0).abs() < 1e-9);
        let s = SideSummary::from_counts("mcts", 4965, 10_000, 93, 200);
        assert!((s.point_win_rate - 49.65).abs() < 1e-9 && (s.match_win_rate - 46.5).abs() < 1e-9);
    }

    #[test]
    fn all_points_to_a() {
        let r = record(vec![point(Player::A, Side::Deuce, &[6], Player::A); 4], Player::A);
        let s = summarize(&[r]).unwrap();
        assert_eq!((s[0].point_win_rate, s[0].match_win_rate), (100.0, 100.0));
        assert_eq!((s[1].point_win_rate, s[1].match_win_rate), (0.0, 0.0));
        assert_eq!(summarize(&[]), Err(AnalyticsError::Empty));
    }

    #[test]
    fn aces_fill_bin_one() {
        let r = record(vec![point(Player::A, Side::Deuce, &[6], Player::A); 10], Player::A);
        let h = rally_length_distribution(&[r]).unwrap();
        assert_eq!(h.percent[0], 100.0);
        assert_eq!(h.total, 10);
        assert_eq!(h.percent.len(), HISTOGRAM_CAP + 1);
    }

    #[test]
    fn overflow_and_double_faults() {
        let h = Histogram::from_lengths([0, 1, 2, 2, 16, 17, 40]).unwrap();
        assert_eq!(h.total, 6);
        assert_eq!(h.double_faults, 1);
        assert_eq!(h.counts[HISTOGRAM_CAP], 2);
        assert_eq!(h.counts[HISTOGRAM_CAP - 1], 1);
        let sum: f64 = h.percent.iter().sum();
        assert!((sum - 100.0).abs() < 1e-6);
        for (c, p) in h.counts.iter().zip(&h.percent) {
            assert!((p * h.total as f64 / 100.0 - *c as f64).abs() < 1e-6);
        }
        assert_eq!(h.bin_label(16), "17+");
        assert_eq!(h.mode(), 2);
        assert_eq!(Histogram::from_lengths([0, 0]), Err(AnalyticsError::Empty));
    }

    #[test]
    fn distance_examples() {
        let a = Histogram::from_percentages(vec![60.0, 40.0]);
        let b = Histogram::from_percentages(vec![50.0, 50.0]);
        let d = histogram_distance(&a, &b).unwrap();
        assert!((d.l1 - 20.0).abs() < 1e-12);
        let d = histogram_distance(&a, &a).unwrap();
        assert_eq!((d.l1, d.max_gap), (0.0, 0.0));
        let c = Histogram::from_percentages(vec![100.0]);
        assert_eq!(histogram_distance(&a, &c), Err(AnalyticsError::BinningMismatch(2, 1)));
    }

    #[test]
    fn published_rally_curves() {
        let real = [
            10.02, 18.02, 16.62, 12.57, 9.99, 7.34, 5.58, 4.31, 3.31, 2.66, 1.99, 1.6, 1.24, 1.01, 0.75, 0.65,
        ];
        let generated = [
            6.23, 17.5, 17.47, 13.44, 10.74, 7.71, 5.89, 4.52, 3.6, 2.76, 2.22, 1.68, 1.33, 1.07, 0.8, 0.64,
        ];
        let d = histogram_distance(
            &Histogram::from_percentages(real.to_vec()),
            &Histogram::from_percentages(generated.to_vec()),
        )
        .unwrap();
        assert_eq!(d.max_gap_bin, 1);
        assert!((d.max_gap - 3.79).abs() < 1e-9);
    }

    #[test]
    fn patterns_rank_and_tally() {
        let mut points = Vec::new();
        // 5 x 4-1-3 (3 won), 2 x 4-2-3 (1 won), 3 x 6 aces, 1 advantage-side point
        for i in 0..5 {
            points.push(point(
                Player::A,
                Side::Deuce,
                &[4, 1, 3],
                if i < 3 { Player::A } else { Player::B },
            ));
        }
        for i in 0..2 {
            points.push(point(
                Player::A,
                Side::Deuce,
                &[4, 2, 3],
                if i < 1 { Player::A } else { Player::B },
            ));
        }
        for _ in 0..3 {
            points.push(point(Player::A, Side::Deuce, &[6], Player::A));
        }
        points.push(point(Player::A, Side::Advantage, &[5, 1], Player::B));
        points.push(point(Player::B, Side::Deuce, &[6], Player::B));
        let recs = [record(points, Player::A)];

        let exact = top_patterns(&recs, Player::A, 10, false).unwrap();
        let deuce = &exact[0];
        assert_eq!(deuce.served_points, 10);
        assert_eq!(deuce.patterns[0].pattern, "4-1-3");
        assert_eq!(deuce.patterns[0].frequency, 5);
        assert!((deuce.patterns[0].point_win_rate - 60.0).abs() < 1e-12);
        assert_eq!(deuce.patterns[1].pattern, "6");
        assert_eq!(deuce.patterns.iter().map(|p| p.frequency).sum::<u64>(), 10);
        assert_eq!(exact[1].patterns[0].pattern, "5-1");
        assert!(exact[2].patterns.is_empty());

        let wild = top_patterns(&recs, Player::A, 1, true).unwrap();
        assert_eq!(wild[0].patterns.len(), 1);
        assert_eq!(wild[0].patterns[0].pattern, "4-*-3");
        assert_eq!(wild[0].patterns[0].frequency, 7);
        assert_eq!(wild[0].patterns[0].wins, 4);

        assert_eq!(top_patterns(&recs, Player::A, 0, false), Err(AnalyticsError::ZeroK));
    }

    #[test]
    fn sweep_rows_mirror_summaries() {
        let summary = |pw: u64, mw: u64| BatchSummary {
            schema_version: "1".into(),
            master_seed: 0,
            n_matches: 200,
            completed: 200,
            sides: [
                SideSummary::from_counts("mcts", pw, 10_000, mw, 200),
                SideSummary::from_counts("bot", 10_000 - pw, 10_000, 200 - mw, 200),
            ],
            failed: vec![],
        };
        let batches = vec![
            ("c=0.914".to_string(), summary(5053, 110)),
            ("c=1.414".to_string(), summary(5171, 126)),
            ("c=1.914".to_string(), summary(5226, 150)),
        ];
        let rows = sweep_report(&batches, Player::A);
        let expect = [(50.53, 55.0), (51.71, 63.0), (52.26, 75.0)];
        for (row, (p, m)) in rows.iter().zip(expect) {
            assert!((row.point_win_rate - p).abs() < 1e-9 && (row.match_win_rate - m).abs() < 1e-9);
        }
        let twins = vec![
            ("x".to_string(), summary(5000, 100)),
            ("y".to_string(), summary(5000, 100)),
        ];
        let rows = sweep_report(&twins, Player::A);
        assert_eq!(rows[0].point_win_rate, rows[1].point_win_rate);
        assert_ne!(rows[0].label, rows[1].label);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("label,point_win_rate,match_win_rate"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn csv_quotes_labels() {
        let s = SideSummary::from_counts("mcts[uct,c=1]", 1, 2, 1, 1);
        let o = SideSummary::from_counts("b", 1, 2, 0, 1);
        let csv = win_summary_csv(&[s, o]);
        assert!(csv.contains("\"mcts[uct,c=1]\""));
    }
}
