//! The `rallyline` command line: ingest, simulate, sweep, analyze, validate.
//!
//! # Match log
//!
//! `simulate --out` writes one JSON object per match and line:
//!
//! | field | |
//! |---|---|
//! | `schema_version` | `"1"` |
//! | `match_index`, `match_seed` | position in the batch and the seed split from the master seed |
//! | `agent_a`, `agent_b` | agent labels |
//! | `first_server` | `"A"` or `"B"` |
//! | `match_config` | format the match was played under |
//! | `final_score` | set scores, e.g. `"6-4 3-6 7-6(5)"` |
//! | `winner` | `"A"` or `"B"` |
//! | `points` | one entry per point, in order |
//!
//! Each point carries `score_before`, `server`, `side`, `second_serve`,
//! `shots` (faults included), `rally_length` (faults excluded, so an ace is 1
//! and a double fault 0), `winner`, and `capped: true` if the rally hit the
//! shot cap.
//!
//! `score_before` lists completed sets, then games in the current set, then
//! points, always with player A first: `"6-4 2-1 30-15"`, `"0-0 40-40"`,
//! `"0-0 Ad-40"`, `"6-4 6-6 TB 3-2"`. A set decided by a tiebreak renders as
//! `7-6(n)` with the loser's tiebreak points in parentheses.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use rallyline::analytics::{
    histogram_csv, patterns_csv, rally_length_distribution, summarize, sweep_csv, sweep_report, top_patterns,
    win_summary_csv,
};
use rallyline::ingest::{
    finalize_profile, ingest_corpus, load_profile, read_rows, save_profile, ColumnMapping, IngestOptions, PlayerFilter,
    ProfileIoError, Smoothing,
};
use rallyline::rules::Player;
use rallyline::shot::CONTEXT_COUNT;
use rallyline::sim::{read_jsonl, run_sweep, write_jsonl, BatchOutcome, SweepParam};

pub mod config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (unknown flag, bad value)
  3  config or schema error (config, mapping or profile document)
  4  data error (unreadable or unparseable input data, invalid profile contents)
  5  internal error (simulation failure, cannot write output)

Failures also print one JSON line to stderr: {\"error\":KIND,\"exit_code\":N,\"message\":TEXT}";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Internal(_) => "internal",
        }
    }

    /// The machine-readable stderr line.
    pub fn json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rallyline",
    version,
    about = "Tennis shot-direction simulation: profiles from charting data, bots and MCTS agents",
    after_help = EXIT_CODES_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a skill profile from a charting CSV.
    #[command(after_help = EXIT_CODES_HELP)]
    Ingest(IngestArgs),
    /// Run a seeded batch of matches.
    #[command(after_help = EXIT_CODES_HELP)]
    Simulate(SimulateArgs),
    /// Run one batch per parameter value and tabulate the results.
    #[command(after_help = EXIT_CODES_HELP)]
    Sweep(SweepArgs),
    /// Compute reports from a match-record file.
    #[command(after_help = EXIT_CODES_HELP)]
    Analyze(AnalyzeArgs),
    /// Check a profile document.
    #[command(after_help = EXIT_CODES_HELP)]
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlayerMode {
    /// Count only the player's own shots.
    Own,
    /// Count every shot of rallies the player took part in.
    Rallies,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Charting CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Column mapping JSON.
    #[arg(long)]
    pub mapping: PathBuf,
    /// Restrict the profile to one player (name as it appears after mapping).
    #[arg(long)]
    pub player: Option<String>,
    /// Which shots a player filter keeps.
    #[arg(long, value_enum, default_value = "own")]
    pub player_mode: PlayerMode,
    /// `none` or `laplace:ALPHA`.
    #[arg(long, default_value = "none")]
    pub smoothing: String,
    /// Count only forehand and backhand groundstrokes.
    #[arg(long)]
    pub strict_shot_types: bool,
    /// Profile output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional ingest report output path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchOverrides {
    /// Override the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the number of matches.
    #[arg(long)]
    pub matches: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Match records, one JSON object per line.
    #[arg(long)]
    pub out: PathBuf,
    /// Batch summary JSON.
    #[arg(long)]
    pub summary: PathBuf,
    #[command(flatten)]
    pub overrides: BatchOverrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    A,
    B,
}

impl From<SideArg> for Player {
    fn from(s: SideArg) -> Player {
        match s {
            SideArg::A => Player::A,
            SideArg::B => Player::B,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Simulation config JSON; one side must be an MCTS agent.
    #[arg(long)]
    pub config: PathBuf,
    /// Parameter to vary: `c` or `iterations`.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values, e.g. 0.914,1.414,1.914.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub values: Vec<f64>,
    /// Side of the MCTS agent to vary (default: the only MCTS side).
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    /// Sweep table CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional sweep table JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: BatchOverrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Artifact {
    Histogram,
    WinSummary,
    Patterns,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Match records JSONL.
    #[arg(long)]
    pub matches: PathBuf,
    /// Artifacts to write, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',', num_args = 1.., default_value = "histogram,win_summary,patterns")]
    pub emit: Vec<Artifact>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub outdir: PathBuf,
    /// Serving side whose patterns are mined.
    #[arg(long, value_enum, default_value = "a")]
    pub agent: SideArg,
    /// Patterns kept per scenario.
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    /// Do not distinguish the return direction in patterns.
    #[arg(long)]
    pub wildcard_return: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Profile JSON.
    #[arg(long)]
    pub profile: PathBuf,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Messages go to `out`, error lines to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            let line = CliError::Usage(e.kind().to_string()).json_line();
            let _ = writeln!(err, "{line}");
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", e.json_line());
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Ingest(a) => ingest(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Validate(a) => validate(a, out),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report") + "\n"
}

fn say(out: &mut dyn Write, msg: impl std::fmt::Display) -> Result<(), CliError> {
    writeln!(out, "{msg}").map_err(|e| CliError::Internal(format!("cannot write to stdout: {e}")))
}

fn ingest(a: IngestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let smoothing = Smoothing::parse(&a.smoothing)
        .ok_or_else(|| CliError::Usage(format!("--smoothing {:?}: expected none or laplace:ALPHA", a.smoothing)))?;
    let mapping_text = fs::read_to_string(&a.mapping)
        .map_err(|e| CliError::Config(format!("cannot read mapping {}: {e}", a.mapping.display())))?;
    let mapping: ColumnMapping = serde_json::from_str(&mapping_text)
        .map_err(|e| CliError::Config(format!("mapping {}: {e}", a.mapping.display())))?;
    let file = fs::File::open(&a.input)
        .map_err(|e| CliError::Data(format!("cannot read input {}: {e}", a.input.display())))?;
    let rows = read_rows(BufReader::new(file), &mapping).map_err(|e| CliError::Config(e.to_string()))?;
    let filter = match (&a.player, a.player_mode) {
        (None, _) => PlayerFilter::All,
        (Some(p), PlayerMode::Own) => PlayerFilter::Player(p.clone()),
        (Some(p), PlayerMode::Rallies) => PlayerFilter::RalliesOf(p.clone()),
    };
    let options = IngestOptions {
        strict_shot_types: a.strict_shot_types,
    };
    let (counts, report) = ingest_corpus(rows, &filter, options);
    if counts.rally_count == 0 {
        return Err(CliError::Data(format!(
            "no usable rallies in {} ({} skipped)",
            a.input.display(),
            report.skipped
        )));
    }
    let profile = finalize_profile(&counts, smoothing).map_err(|e| CliError::Data(e.to_string()))?;
    let text = save_profile(&profile).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&a.out, &text)?;
    if let Some(path) = &a.report {
        write_file(path, &to_json(&report))?;
    }
    say(
        out,
        format!(
            "ingested {} rallies ({} skipped, {} shots) into {}",
            report.rallies,
            report.skipped,
            report.classified_shots,
            a.out.display()
        ),
    )
}

fn apply_overrides(batch: &mut rallyline::sim::BatchConfig, o: &BatchOverrides) -> Result<(), CliError> {
    if let Some(seed) = o.seed {
        batch.master_seed = seed;
    }
    if let Some(n) = o.matches {
        if n == 0 {
            return Err(CliError::Usage("--matches must be positive".into()));
        }
        batch.n_matches = n;
    }
    if let Some(p) = o.parallelism {
        if p == 0 {
            return Err(CliError::Usage("--parallelism must be at least 1".into()));
        }
        batch.parallelism = p;
    }
    Ok(())
}

fn check_failures(outcome: &BatchOutcome) -> Result<(), CliError> {
    match outcome.summary.failed.first() {
        None => Ok(()),
        Some(f) => Err(CliError::Internal(format!(
            "{} match(es) failed; first: match {}: {}",
            outcome.summary.failed.len(),
            f.match_index,
            f.error
        ))),
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut batch = config::load_batch(&a.config)?;
    apply_overrides(&mut batch, &a.overrides)?;
    let outcome = rallyline::sim::run_batch(&batch).map_err(|e| CliError::Config(e.to_string()))?;
    let mut jsonl = Vec::new();
    write_jsonl(&outcome.records, &mut jsonl).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&a.out, std::str::from_utf8(&jsonl).expect("JSON is UTF-8"))?;
    write_file(&a.summary, &to_json(&outcome.summary))?;
    check_failures(&outcome)?;
    let s = &outcome.summary.sides;
    say(
        out,
        format!(
            "{} matches: A {:.2}% points, {:.2}% matches; B {:.2}% points, {:.2}% matches",
            outcome.summary.completed,
            s[0].point_win_rate,
            s[0].match_win_rate,
            s[1].point_win_rate,
            s[1].match_win_rate
        ),
    )
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let param = SweepParam::parse(&a.param)
        .ok_or_else(|| CliError::Usage(format!("--param {:?}: expected c or iterations", a.param)))?;
    if a.values.is_empty() {
        return Err(CliError::Usage("--values needs at least one value".into()));
    }
    let mut batch = config::load_batch(&a.config)?;
    apply_overrides(&mut batch, &a.overrides)?;
    let is_mcts = |s: &rallyline::agents::AgentSpec| matches!(s, rallyline::agents::AgentSpec::Mcts(_));
    let side = match a.side {
        Some(s) => s.into(),
        None => match (is_mcts(&batch.agent_a), is_mcts(&batch.agent_b)) {
            (true, false) => Player::A,
            (false, true) => Player::B,
            (true, true) => return Err(CliError::Usage("both sides are MCTS agents; pass --side".into())),
            (false, false) => return Err(CliError::Config("sweep needs an MCTS agent in the config".into())),
        },
    };
    let batches = run_sweep(&batch, side, param, &a.values).map_err(|e| CliError::Config(e.to_string()))?;
    for b in &batches {
        check_failures(&b.outcome)?;
    }
    let labeled: Vec<_> = batches
        .iter()
        .map(|b| (b.label.clone(), b.outcome.summary.clone()))
        .collect();
    let rows = sweep_report(&labeled, side);
    write_file(&a.out, &sweep_csv(&rows))?;
    if let Some(path) = &a.json {
        write_file(path, &to_json(&rows))?;
    }
    for r in &rows {
        say(
            out,
            format!(
                "{}: {:.2}% points, {:.2}% matches",
                r.label, r.point_win_rate, r.match_win_rate
            ),
        )?;
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.top_k == 0 {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    let file = fs::File::open(&a.matches)
        .map_err(|e| CliError::Data(format!("cannot read matches {}: {e}", a.matches.display())))?;
    let records =
        read_jsonl(BufReader::new(file)).map_err(|e| CliError::Data(format!("{}: {e}", a.matches.display())))?;
    if records.is_empty() {
        return Err(CliError::Data(format!(
            "{} holds no match records",
            a.matches.display()
        )));
    }
    let data = |e: rallyline::analytics::AnalyticsError| CliError::Data(e.to_string());
    let mut emitted = Vec::new();
    let mut emit = a.emit.clone();
    emit.dedup();
    for artifact in emit {
        match artifact {
            Artifact::Histogram => {
                let h = rally_length_distribution(&records).map_err(data)?;
                write_file(&a.outdir.join("histogram.csv"), &histogram_csv(&h))?;
                write_file(&a.outdir.join("histogram.json"), &to_json(&h))?;
                emitted.push("histogram");
            }
            Artifact::WinSummary => {
                let s = summarize(&records).map_err(data)?;
                write_file(&a.outdir.join("win_summary.csv"), &win_summary_csv(&s))?;
                write_file(&a.outdir.join("win_summary.json"), &to_json(&s))?;
                emitted.push("win_summary");
            }
            Artifact::Patterns => {
                let p = top_patterns(&records, a.agent.into(), a.top_k, a.wildcard_return).map_err(data)?;
                write_file(&a.outdir.join("patterns.csv"), &patterns_csv(&p))?;
                write_file(&a.outdir.join("patterns.json"), &to_json(&p))?;
                emitted.push("patterns");
            }
        }
    }
    say(
        out,
        format!(
            "{} matches analyzed; wrote {} to {}",
            records.len(),
            emitted.join(", "),
            a.outdir.display()
        ),
    )
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.profile)
        .map_err(|e| CliError::Config(format!("cannot read profile {}: {e}", a.profile.display())))?;
    match load_profile(&text) {
        Ok(_) => say(out, format!("OK {CONTEXT_COUNT} contexts")),
        Err(ProfileIoError::Invalid(report)) => Err(CliError::Data(format!(
            "{} is invalid ({} issue(s)): {}",
            a.profile.display(),
            report.issues.len(),
            report.to_string().replace('\n', "; ")
        ))),
        Err(e) => Err(CliError::Config(format!("{}: {e}", a.profile.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_flag_is_documented_in_help() {
        let mut root = Cli::command();
        let root_help = root.render_long_help().to_string();
        assert!(root_help.contains("Exit codes"));
        for sub in Cli::command().get_subcommands_mut() {
            let name = sub.get_name().to_string();
            let help = sub.render_long_help().to_string();
            assert!(help.contains("Exit codes"), "{name}");
            for arg in sub.get_arguments() {
                let Some(long) = arg.get_long() else { continue };
                assert!(help.contains(&format!("--{long}")), "{name} --{long} missing from help");
                if long != "help" {
                    assert!(arg.get_help().is_some(), "{name} --{long} has no description");
                }
            }
        }
    }

    #[test]
    fn error_lines_are_json() {
        let e = CliError::Config("bad".into());
        let v: serde_json::Value = serde_json::from_str(&e.json_line()).unwrap();
        assert_eq!(v["exit_code"], 3);
        assert_eq!(v["error"], "config");
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(["rallyline", "validate", "--nope"], &mut out, &mut err);
        assert_eq!(code, EXIT_USAGE);
        let last = String::from_utf8(err).unwrap();
        let line = last.lines().last().unwrap();
        assert_eq!(serde_json::from_str::<serde_json::Value>(line).unwrap()["exit_code"], 2);
    }
}
