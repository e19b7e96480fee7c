//! Regenerates the bundled synthetic charting corpus and its derived files.
//!
//!     cargo run -p rallyline --example gen_fixture -- fixtures

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rallyline::agents::AgentSpec;
use rallyline::ingest::{
    finalize_profile, ingest_corpus, read_rows, save_profile, ColumnMapping, IngestOptions, PlayerFilter, Smoothing,
};
use rallyline::rng::RandomStream;
use rallyline::rules::Player;
use rallyline::shot::{Direction, Outcome};
use rallyline::sim::{run_batch, BatchConfig, PointRecord};
use rallyline::synthetic::PlayerParams;

const PLAYERS: [&str; 2] = ["Alex_Rivera", "Blake_Chen"];
const MATCHES: u64 = 12;
const SEED: u64 = 73_102_024;

fn shot_type(direction: Direction, rng: &mut RandomStream) -> char {
    let u = rng.uniform();
    if u < 0.06 {
        's'
    } else if u < 0.09 {
        'v'
    } else if u < 0.10 {
        'u'
    } else if u < 0.12 {
        'r'
    } else if direction == Direction::FOREHAND_SIDE || (direction == Direction::MIDDLE && u < 0.6) {
        'f'
    } else {
        'b'
    }
}

fn error_suffix(rng: &mut RandomStream) -> &'static str {
    match rng.below(6) {
        0 => "n@",
        1 => "w@",
        2 => "d@",
        3 => "n#",
        4 => "w#",
        _ => "x@",
    }
}

/// Charting strings for one simulated point: (1st, 2nd).
fn notation(point: &PointRecord, rng: &mut RandomStream) -> (String, String) {
    let mut strings = vec![String::new()];
    let mut serve_index = 0;
    for (i, shot) in point.shots.iter().enumerate() {
        let s = strings.last_mut().expect("non-empty");
        if shot.context.is_serve() {
            if serve_index > 0 {
                strings.push(String::new());
            }
            serve_index += 1;
            let s = strings.last_mut().expect("non-empty");
            s.push_str(&shot.direction.code().to_string());
            match shot.outcome {
                Outcome::Error => s.push_str(["n", "w", "d", "x"][rng.below(4) as usize]),
                Outcome::Winner => s.push(if rng.below(4) == 0 { '#' } else { '*' }),
                Outcome::InPlay => {}
            }
            continue;
        }
        s.push(shot_type(shot.direction, rng));
        s.push_str(&shot.direction.code().to_string());
        let is_return = i > 0 && point.shots[i - 1].context.is_serve();
        if is_return {
            s.push_str(["7", "8", "9"][rng.below(3) as usize]);
        }
        match shot.outcome {
            Outcome::Error => s.push_str(error_suffix(rng)),
            Outcome::Winner => s.push('*'),
            Outcome::InPlay => {}
        }
    }
    let second = strings.get(1).cloned().unwrap_or_default();
    (strings[0].clone(), second)
}

fn points_column(score_before: &str) -> String {
    score_before.rsplit(' ').next().unwrap_or("0-0").to_string()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    fs::create_dir_all(out_dir.join("profiles"))?;

    let average = PlayerParams::default();
    let strong = PlayerParams {
        serve_directions: [0.5, 0.1, 0.4],
        ..average.with_edge(0.08)
    };
    let batch = BatchConfig::new(
        AgentSpec::Bot {
            profile: Arc::new(strong.profile(PLAYERS[0])),
        },
        AgentSpec::Bot {
            profile: Arc::new(average.profile(PLAYERS[1])),
        },
        MATCHES,
        SEED,
    );
    let outcome = run_batch(&batch)?;

    let mut rng = RandomStream::from_seed(SEED ^ 0xC5);
    let mut csv = csv::Writer::from_path(out_dir.join("synthetic_charting.csv"))?;
    csv.write_record(["match_id", "Pt", "Svr", "Pts", "1st", "2nd"])?;
    for record in &outcome.records {
        let match_id = format!(
            "2024{:02}{:02}-M-Synthetic_Open-R{}-{}-{}",
            1 + record.match_index / 28,
            1 + record.match_index % 28,
            16,
            PLAYERS[0],
            PLAYERS[1]
        );
        for (n, point) in record.points.iter().enumerate() {
            let (mut first, second) = notation(point, &mut rng);
            // a handful of rows the strict grammar rejects
            if rng.below(150) == 0 {
                first.push('+');
            }
            let server = match point.server {
                Player::A => "1",
                Player::B => "2",
            };
            csv.write_record([
                match_id.as_str(),
                &(n + 1).to_string(),
                server,
                &points_column(&point.score_before),
                &first,
                &second,
            ])?;
        }
    }
    csv.flush()?;
    drop(csv);

    let mapping = ColumnMapping::charting_default();
    fs::write(
        out_dir.join("charting_mapping.json"),
        serde_json::to_string_pretty(&mapping)? + "\n",
    )?;

    let ingest = |filter: PlayerFilter, path: &Path| -> Result<(), Box<dyn std::error::Error>> {
        let file = fs::File::open(out_dir.join("synthetic_charting.csv"))?;
        let rows = read_rows(file, &mapping)?;
        let (counts, _) = ingest_corpus(rows, &filter, IngestOptions::default());
        let profile = finalize_profile(&counts, Smoothing::Laplace(1.0))?;
        fs::write(path, save_profile(&profile)?)?;
        Ok(())
    };
    ingest(
        PlayerFilter::Player("Alex Rivera".into()),
        &out_dir.join("profiles/rivera.json"),
    )?;
    ingest(PlayerFilter::All, &out_dir.join("profiles/average.json"))?;
    println!(
        "wrote {} points from {} matches to {}",
        outcome.records.iter().map(|r| r.points.len()).sum::<usize>(),
        outcome.records.len(),
        out_dir.display()
    );
    Ok(())
}
