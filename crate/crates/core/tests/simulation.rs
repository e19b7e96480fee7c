use std::sync::Arc;
use std::time::Instant;

use rallyline::agents::AgentSpec;
use rallyline::analytics::{rally_length_distribution, summarize};
use rallyline::sim::{replay_matches, run_batch, BatchConfig};
use rallyline::synthetic::PlayerParams;

fn bot(params: PlayerParams, label: &str) -> AgentSpec {
    AgentSpec::Bot {
        profile: Arc::new(params.profile(label)),
    }
}

#[test]
fn symmetric_bots_split_evenly() {
    let avg = bot(PlayerParams::default(), "avg");
    let mut batch = BatchConfig::new(avg.clone(), avg, 2000, 20_240_611);
    batch.parallelism = 4;
    let start = Instant::now();
    let out = run_batch(&batch).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "{elapsed}s");
    assert!(out.is_complete());
    let a = &out.summary.sides[0];
    // 3 sigma: 3 * sqrt(0.25 / 2000) = 3.35 pp
    assert!((a.match_win_rate - 50.0).abs() <= 3.4, "{}", a.match_win_rate);
    assert!((a.point_win_rate - 50.0).abs() <= 1.0, "{}", a.point_win_rate);
    let b = &out.summary.sides[1];
    assert!((a.match_win_rate + b.match_win_rate - 100.0).abs() < 1e-9);
    assert!((a.point_win_rate + b.point_win_rate - 100.0).abs() < 1e-9);
    assert!(out.records.iter().all(replay_matches));
    let points: u64 = out.records.iter().map(|r| r.points.len() as u64).sum();
    assert_eq!(a.points_won + b.points_won, points);
}

#[test]
fn synthetic_rally_lengths_look_like_tennis() {
    let avg = bot(PlayerParams::default(), "avg");
    let out = run_batch(&BatchConfig::new(avg.clone(), avg, 100, 3)).unwrap();
    let h = rally_length_distribution(&out.records).unwrap();
    let sum: f64 = h.percent.iter().sum();
    assert!((sum - 100.0).abs() < 1e-6);
    assert!((2..=3).contains(&h.mode()), "mode {}", h.mode());
}

#[test]
fn higher_point_rate_never_loses_much_match_rate() {
    let avg = PlayerParams::default();
    let mut rows = Vec::new();
    for (i, edge) in [0.0, 0.05, 0.1, 0.15].into_iter().enumerate() {
        let batch = BatchConfig::new(bot(avg.with_edge(edge), "edged"), bot(avg, "avg"), 200, 100 + i as u64);
        let out = run_batch(&batch).unwrap();
        let s = summarize(&out.records).unwrap();
        rows.push(s[0].clone());
    }
    for x in &rows {
        for y in &rows {
            if x.point_win_rate > y.point_win_rate {
                let joint =
                    (x.match_win_ci[1] - x.match_win_ci[0]) / 2.0 + (y.match_win_ci[1] - y.match_win_ci[0]) / 2.0;
                assert!(
                    x.match_win_rate >= y.match_win_rate - joint,
                    "{} / {} vs {} / {}",
                    x.point_win_rate,
                    x.match_win_rate,
                    y.point_win_rate,
                    y.match_win_rate
                );
            }
        }
    }
    let strongest = rows.last().unwrap();
    assert!(
        strongest.match_win_rate > strongest.point_win_rate,
        "matches amplify point edges"
    );
    assert_eq!(strongest.label, rows[0].label);
}
