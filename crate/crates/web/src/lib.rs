//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string. The plain Rust functions underneath
//! are what the native tests exercise.

use std::sync::Arc;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rallyline::agents::{mcts_search, AgentSpec, MctsConfig};
use rallyline::analytics::{rally_length_distribution, Histogram};
use rallyline::rng::RandomStream;
use rallyline::rules::{Player, RallyState};
use rallyline::shot::{Direction, ServeNumber, Side};
use rallyline::sim::{run_batch, BatchConfig};
use rallyline::synthetic::PlayerParams;

const MAX_MATCHES: u64 = 5_000;
const MAX_ITERATIONS: u32 = 200_000;

#[derive(Serialize)]
pub struct BatchView {
    pub edge: f64,
    pub matches: u64,
    pub point_win_rate: f64,
    pub match_win_rate: f64,
    pub match_win_ci: [f64; 2],
    pub rally_labels: Vec<String>,
    pub rally_percent: Vec<f64>,
}

#[derive(Serialize)]
pub struct ChildView {
    pub direction: u8,
    pub visits: u32,
    pub value: Option<f64>,
}

#[derive(Serialize)]
pub struct SearchView {
    pub choice: u8,
    pub iterations: u32,
    pub children: Vec<ChildView>,
}

fn bots(edge: f64) -> Result<(AgentSpec, AgentSpec), String> {
    if !(0.0..=1.0).contains(&edge) {
        return Err(format!("edge must lie in [0, 1], got {edge}"));
    }
    let base = PlayerParams::default();
    let strong = AgentSpec::Bot {
        profile: Arc::new(base.with_edge(edge).profile("stronger")),
    };
    let average = AgentSpec::Bot {
        profile: Arc::new(base.profile("average")),
    };
    Ok((strong, average))
}

/// Plays `matches` best-of-three matches between a bot that converts `edge`
/// of its errors into winners and an average bot.
pub fn batch(edge: f64, matches: u64, seed: u64) -> Result<BatchView, String> {
    if matches == 0 || matches > MAX_MATCHES {
        return Err(format!("matches must lie in 1..={MAX_MATCHES}"));
    }
    let (a, b) = bots(edge)?;
    let out = run_batch(&BatchConfig::new(a, b, matches, seed)).map_err(|e| e.to_string())?;
    let side = &out.summary.sides[0];
    let hist: Histogram = rally_length_distribution(&out.records).map_err(|e| e.to_string())?;
    Ok(BatchView {
        edge,
        matches,
        point_win_rate: side.point_win_rate,
        match_win_rate: side.match_win_rate,
        match_win_ci: side.match_win_ci,
        rally_labels: (0..hist.percent.len()).map(|b| hist.bin_label(b)).collect(),
        rally_percent: hist.percent,
    })
}

/// Root statistics for the shot after the opponent's return to `incoming`
/// (1-3), with the serve having gone wide.
pub fn search(edge: f64, incoming: u8, iterations: u32, c: f64, seed: u64) -> Result<SearchView, String> {
    if iterations == 0 || iterations > MAX_ITERATIONS {
        return Err(format!("iterations must lie in 1..={MAX_ITERATIONS}"));
    }
    let incoming = Direction::rally(incoming).map_err(|e| e.to_string())?;
    let base = PlayerParams::default();
    if !(0.0..=1.0).contains(&edge) {
        return Err(format!("edge must lie in [0, 1], got {edge}"));
    }
    let mut cfg = MctsConfig::new(
        Arc::new(base.with_edge(edge).profile("self")),
        Arc::new(base.profile("opponent")),
    );
    cfg.iterations = iterations;
    cfg.exploration_c = c;
    let state = RallyState::mid_rally(Player::A, Side::Deuce, ServeNumber::First, Direction::WIDE, &[incoming])
        .map_err(|e| e.to_string())?;
    let mut rng = RandomStream::from_seed(seed);
    let (choice, tree) = mcts_search(&state, Player::A, &cfg, &mut rng).map_err(|e| e.to_string())?;
    let children = tree
        .root_stats(&Direction::RALLY)
        .into_iter()
        .map(|s| ChildView {
            direction: s.direction.code(),
            visits: s.visits,
            value: (s.visits > 0).then(|| s.wins / s.visits as f64),
        })
        .collect();
    Ok(SearchView {
        choice: choice.code(),
        iterations,
        children,
    })
}

/// Point and match win rates for `steps + 1` evenly spaced edges in
/// `[0, max_edge]`.
pub fn curve(max_edge: f64, steps: u32, matches: u64, seed: u64) -> Result<Vec<BatchView>, String> {
    if steps == 0 || steps > 40 {
        return Err("steps must lie in 1..=40".into());
    }
    (0..=steps)
        .map(|i| batch(max_edge * i as f64 / steps as f64, matches, seed.wrapping_add(i as u64)))
        .collect()
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn simulate_batch(edge: f64, matches: u32, seed: u32) -> Result<String, JsError> {
    to_json(batch(edge, matches as u64, seed as u64))
}

#[wasm_bindgen]
pub fn explore_search(edge: f64, incoming: u8, iterations: u32, c: f64, seed: u32) -> Result<String, JsError> {
    to_json(search(edge, incoming, iterations, c, seed as u64))
}

#[wasm_bindgen]
pub fn amplification_curve(max_edge: f64, steps: u32, matches: u32, seed: u32) -> Result<String, JsError> {
    to_json(curve(max_edge, steps, matches as u64, seed as u64))
}
