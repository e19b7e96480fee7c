//! From shot-by-shot charting rows to skill profiles.
//!
//! `rows` maps CSV columns onto [`RallyRow`]s, `parse` reads the rally
//! strings, `counts` classifies shots into contexts and accumulates counts,
//! and `profile_io` reads and writes the profile JSON.

use thiserror::Error;

use crate::shot::{HitterContext, Side};

pub mod counts;
pub mod parse;
pub mod profile_io;
pub mod rows;

pub use counts::{
    classify_shots, finalize_profile, ingest_corpus, ClassifiedShot, CountTables, IngestOptions, IngestReport,
    PlayerFilter, Smoothing,
};
pub use parse::{parse_point, parse_rally_string, ParseError, ParsedRally};
pub use profile_io::{load_profile, save_profile, ProfileIoError};
pub use rows::{read_rows, ColumnMapping};

/// One charted point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RallyRow {
    /// Source line, for diagnostics.
    pub line: u64,
    pub match_id: String,
    pub server_name: String,
    pub returner_name: String,
    pub side: Side,
    pub first_serve: String,
    /// Present iff the first serve was a fault.
    pub second_serve: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("column mapping: {0}")]
    Mapping(String),
    #[error("context {0} has no observations; use smoothing")]
    EmptyContext(HitterContext),
    #[error("context {0} has no error or winner observations; use smoothing")]
    NoTerminalObservations(HitterContext),
}
