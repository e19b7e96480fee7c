//! Tennis as a stochastic shot-direction game: skill profiles extracted
//! from charting data, data-driven bots, MCTS agents and a seeded match
//! simulator with analytics.

pub mod agents;
pub mod analytics;
pub mod ingest;
pub mod rng;
pub mod rules;
pub mod shot;
pub mod sim;
pub mod synthetic;
