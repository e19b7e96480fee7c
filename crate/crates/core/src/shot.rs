//! Shot and serve encoding, hitter contexts and skill profiles.
//!
//! A [`SkillProfile`] stores, for each of the 28 [`HitterContext`]s, the joint
//! distribution over (direction, outcome) as a 3×3 table. The direction
//! marginal of a row is a bot's action policy; the outcome conditional given a
//! direction is the environment's chance component.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;

/// Absolute tolerance applied to every probability-sum check.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Number of distinct hitter contexts (4 serve + 12 return + 12 rally).
pub const CONTEXT_COUNT: usize = 28;

/// Probabilities stored per profile: 28 contexts × 3 directions × 3 outcomes.
pub const PROBABILITY_COUNT: usize = CONTEXT_COUNT * 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("invalid direction code {0}; expected 1-3 (rally) or 4-6 (serve)")]
    InvalidCode(u8),
    #[error("direction {code} is not a {expected} direction")]
    WrongPhase { code: u8, expected: &'static str },
}

/// Shot direction. Codes 1–3 are rally directions (forehand side, middle,
/// backhand side of a right-hander), 4–6 serve directions (wide, body, T).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Direction(u8);

impl Direction {
    pub const FOREHAND_SIDE: Direction = Direction(1);
    pub const MIDDLE: Direction = Direction(2);
    pub const BACKHAND_SIDE: Direction = Direction(3);
    pub const WIDE: Direction = Direction(4);
    pub const BODY: Direction = Direction(5);
    pub const T: Direction = Direction(6);

    pub const RALLY: [Direction; 3] = [Self::FOREHAND_SIDE, Self::MIDDLE, Self::BACKHAND_SIDE];
    pub const SERVE: [Direction; 3] = [Self::WIDE, Self::BODY, Self::T];

    pub fn from_code(code: u8) -> Result<Self, EncodingError> {
        match code {
            1..=6 => Ok(Direction(code)),
            _ => Err(EncodingError::InvalidCode(code)),
        }
    }

    pub fn rally(code: u8) -> Result<Self, EncodingError> {
        match Self::from_code(code)? {
            d if !d.is_serve() => Ok(d),
            _ => Err(EncodingError::WrongPhase {
                code,
                expected: "rally",
            }),
        }
    }

    pub fn serve(code: u8) -> Result<Self, EncodingError> {
        match Self::from_code(code)? {
            d if d.is_serve() => Ok(d),
            _ => Err(EncodingError::WrongPhase {
                code,
                expected: "serve",
            }),
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn is_serve(self) -> bool {
        self.0 >= 4
    }

    /// Row index 0..3 inside a joint table.
    pub fn slot(self) -> usize {
        ((self.0 - 1) % 3) as usize
    }
}

impl TryFrom<u8> for Direction {
    type Error = EncodingError;

    fn try_from(code: u8) -> Result<Self, Self::Error> {
        Direction::from_code(code)
    }
}

impl From<Direction> for u8 {
    fn from(d: Direction) -> u8 {
        d.0
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of a single shot. On a serve, `Error` is a fault, `Winner` an ace
/// and `InPlay` a returnable serve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Error,
    Winner,
    InPlay,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Error, Outcome::Winner, Outcome::InPlay];

    pub fn index(self) -> usize {
        match self {
            Outcome::Error => 0,
            Outcome::Winner => 1,
            Outcome::InPlay => 2,
        }
    }

    pub fn is_terminal(self) -> bool {
        self != Outcome::InPlay
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Deuce,
    Advantage,
}

impl Side {
    pub const ALL: [Side; 2] = [Side::Deuce, Side::Advantage];

    /// Deuce when an even number of points has been played in the game.
    pub fn from_points_played(points: u32) -> Side {
        if points.is_multiple_of(2) {
            Side::Deuce
        } else {
            Side::Advantage
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServeNumber {
    First,
    Second,
}

impl ServeNumber {
    pub const ALL: [ServeNumber; 2] = [ServeNumber::First, ServeNumber::Second];

    fn index(self) -> usize {
        self as usize
    }
}

/// The game-state key under which a shot's probabilities are looked up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum HitterContext {
    Serve {
        side: Side,
        serve_number: ServeNumber,
    },
    Return {
        side: Side,
        serve_number: ServeNumber,
        serve_direction: Direction,
    },
    Rally {
        hitter_served: bool,
        serve_number: ServeNumber,
        previous_direction: Direction,
    },
}

impl HitterContext {
    /// Dense index in `0..28`: serves first, then returns, then rally shots.
    pub fn index(&self) -> usize {
        match *self {
            HitterContext::Serve { side, serve_number } => side.index() * 2 + serve_number.index(),
            HitterContext::Return {
                side,
                serve_number,
                serve_direction,
            } => 4 + (side.index() * 2 + serve_number.index()) * 3 + serve_direction.slot(),
            HitterContext::Rally {
                hitter_served,
                serve_number,
                previous_direction,
            } => {
                let served = if hitter_served { 0 } else { 1 };
                16 + (served * 2 + serve_number.index()) * 3 + previous_direction.slot()
            }
        }
    }

    pub fn from_index(index: usize) -> Option<HitterContext> {
        let side = |i: usize| Side::ALL[i / 2];
        let number = |i: usize| ServeNumber::ALL[i % 2];
        match index {
            0..=3 => Some(HitterContext::Serve {
                side: side(index),
                serve_number: number(index),
            }),
            4..=15 => {
                let i = index - 4;
                Some(HitterContext::Return {
                    side: side(i / 3),
                    serve_number: number(i / 3),
                    serve_direction: Direction::SERVE[i % 3],
                })
            }
            16..=27 => {
                let i = index - 16;
                Some(HitterContext::Rally {
                    hitter_served: i / 6 == 0,
                    serve_number: number(i / 3),
                    previous_direction: Direction::RALLY[i % 3],
                })
            }
            _ => None,
        }
    }

    /// All 28 contexts in index order.
    pub fn all() -> impl Iterator<Item = HitterContext> {
        (0..CONTEXT_COUNT).filter_map(HitterContext::from_index)
    }

    /// Checks that the embedded directions have the right phase.
    pub fn check(&self) -> Result<(), EncodingError> {
        match *self {
            HitterContext::Serve { .. } => Ok(()),
            HitterContext::Return { serve_direction, .. } => Direction::serve(serve_direction.code()).map(|_| ()),
            HitterContext::Rally { previous_direction, .. } => Direction::rally(previous_direction.code()).map(|_| ()),
        }
    }

    pub fn is_serve(&self) -> bool {
        matches!(self, HitterContext::Serve { .. })
    }

    pub fn serve_number(&self) -> ServeNumber {
        match *self {
            HitterContext::Serve { serve_number, .. }
            | HitterContext::Return { serve_number, .. }
            | HitterContext::Rally { serve_number, .. } => serve_number,
        }
    }

    /// The directions a hitter may choose in this context.
    pub fn legal_directions(&self) -> &'static [Direction; 3] {
        if self.is_serve() {
            &Direction::SERVE
        } else {
            &Direction::RALLY
        }
    }

    pub fn check_direction(&self, direction: Direction) -> Result<(), EncodingError> {
        match (self.is_serve(), direction.is_serve()) {
            (true, true) | (false, false) => Ok(()),
            (true, false) => Err(EncodingError::WrongPhase {
                code: direction.code(),
                expected: "serve",
            }),
            (false, true) => Err(EncodingError::WrongPhase {
                code: direction.code(),
                expected: "rally",
            }),
        }
    }
}

impl fmt::Display for HitterContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sn = |n: ServeNumber| match n {
            ServeNumber::First => "first",
            ServeNumber::Second => "second",
        };
        let sd = |s: Side| match s {
            Side::Deuce => "deuce",
            Side::Advantage => "advantage",
        };
        match *self {
            HitterContext::Serve { side, serve_number } => {
                write!(f, "serve({}, {})", sd(side), sn(serve_number))
            }
            HitterContext::Return {
                side,
                serve_number,
                serve_direction,
            } => write!(
                f,
                "return({}, {}, serve {})",
                sd(side),
                sn(serve_number),
                serve_direction
            ),
            HitterContext::Rally {
                hitter_served,
                serve_number,
                previous_direction,
            } => write!(
                f,
                "rally({}, {}, previous {})",
                if hitter_served { "server" } else { "returner" },
                sn(serve_number),
                previous_direction
            ),
        }
    }
}

/// Joint distribution `p[direction slot][outcome index]` for one context.
pub type JointTable = [[f64; 3]; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShotModelError {
    #[error("no table for context {0}")]
    UnknownContext(HitterContext),
    #[error("direction {direction} was never observed in context {context}")]
    UnsupportedDirection {
        context: HitterContext,
        direction: Direction,
    },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

/// Conditional outcome probabilities for one (context, direction).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub error: f64,
    pub winner: f64,
    pub in_play: f64,
}

impl OutcomeDistribution {
    pub fn as_array(&self) -> [f64; 3] {
        [self.error, self.winner, self.in_play]
    }

    /// Inverse-CDF sample from one uniform draw.
    pub fn sample(&self, u: f64) -> Outcome {
        if u < self.error {
            Outcome::Error
        } else if u < self.error + self.winner || self.in_play == 0.0 {
            Outcome::Winner
        } else {
            Outcome::InPlay
        }
    }
}

/// One problem found by [`SkillProfile::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    MissingContext(HitterContext),
    NonFinite {
        context: HitterContext,
        direction: usize,
        outcome: Outcome,
    },
    NegativeEntry {
        context: HitterContext,
        direction: usize,
        outcome: Outcome,
        value: f64,
    },
    NotNormalized {
        context: HitterContext,
        sum: f64,
        /// `1 - sum`
        deficit: f64,
    },
    NoTerminalMass(HitterContext),
}

impl ValidationIssue {
    pub fn context(&self) -> HitterContext {
        match self {
            ValidationIssue::MissingContext(c) | ValidationIssue::NoTerminalMass(c) => *c,
            ValidationIssue::NonFinite { context, .. }
            | ValidationIssue::NegativeEntry { context, .. }
            | ValidationIssue::NotNormalized { context, .. } => *context,
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::MissingContext(c) => write!(f, "missing context {c}"),
            ValidationIssue::NonFinite {
                context,
                direction,
                outcome,
            } => write!(
                f,
                "{context}: non-finite entry at direction slot {direction}, {outcome:?}"
            ),
            ValidationIssue::NegativeEntry {
                context,
                direction,
                outcome,
                value,
            } => write!(
                f,
                "{context}: negative entry {value} at direction slot {direction}, {outcome:?}"
            ),
            ValidationIssue::NotNormalized { context, sum, deficit } => {
                write!(f, "{context}: row sums to {sum} (deficit {deficit})")
            }
            ValidationIssue::NoTerminalMass(c) => {
                write!(f, "{c}: no error or winner mass, rallies could never end")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Context-conditioned joint (direction, outcome) probabilities for one player.
#[derive(Clone, Debug, PartialEq)]
pub struct SkillProfile {
    pub provenance: String,
    tables: [Option<JointTable>; CONTEXT_COUNT],
}

impl SkillProfile {
    /// A profile with no tables.
    pub fn empty(provenance: impl Into<String>) -> Self {
        Self {
            provenance: provenance.into(),
            tables: [None; CONTEXT_COUNT],
        }
    }

    /// Builds all 28 tables from a function of the context.
    pub fn from_fn(provenance: impl Into<String>, mut f: impl FnMut(&HitterContext) -> JointTable) -> Self {
        let mut profile = Self::empty(provenance);
        for ctx in HitterContext::all() {
            profile.tables[ctx.index()] = Some(f(&ctx));
        }
        profile
    }

    /// Every cell 1/9 in every context.
    pub fn uniform(provenance: impl Into<String>) -> Self {
        Self::from_fn(provenance, |_| [[1.0 / 9.0; 3]; 3])
    }

    pub fn set_table(&mut self, ctx: HitterContext, table: JointTable) {
        self.tables[ctx.index()] = Some(table);
    }

    pub fn remove_table(&mut self, ctx: &HitterContext) -> Option<JointTable> {
        self.tables[ctx.index()].take()
    }

    pub fn table(&self, ctx: &HitterContext) -> Option<&JointTable> {
        self.tables[ctx.index()].as_ref()
    }

    /// Present tables in context index order.
    pub fn tables(&self) -> impl Iterator<Item = (HitterContext, &JointTable)> {
        HitterContext::all().filter_map(move |c| self.table(&c).map(|t| (c, t)))
    }

    /// Lists every missing, negative, non-finite, unnormalized or
    /// non-terminating context. Never fails.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        for ctx in HitterContext::all() {
            let Some(table) = self.table(&ctx) else {
                issues.push(ValidationIssue::MissingContext(ctx));
                continue;
            };
            let mut sum = 0.0;
            let mut terminal = 0.0;
            let mut broken = false;
            for (d, row) in table.iter().enumerate() {
                for (o, &p) in row.iter().enumerate() {
                    let outcome = Outcome::ALL[o];
                    if !p.is_finite() {
                        issues.push(ValidationIssue::NonFinite {
                            context: ctx,
                            direction: d,
                            outcome,
                        });
                        broken = true;
                    } else if p < 0.0 {
                        issues.push(ValidationIssue::NegativeEntry {
                            context: ctx,
                            direction: d,
                            outcome,
                            value: p,
                        });
                        broken = true;
                    }
                    sum += p;
                    if outcome.is_terminal() {
                        terminal += p;
                    }
                }
            }
            if broken {
                continue;
            }
            if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                issues.push(ValidationIssue::NotNormalized {
                    context: ctx,
                    sum,
                    deficit: 1.0 - sum,
                });
            }
            if terminal <= 0.0 {
                issues.push(ValidationIssue::NoTerminalMass(ctx));
            }
        }
        ValidationReport { issues }
    }

    fn lookup(&self, ctx: &HitterContext) -> Result<&JointTable, ShotModelError> {
        self.table(ctx).ok_or(ShotModelError::UnknownContext(*ctx))
    }

    /// Probability of choosing each legal direction (outcomes summed out).
    pub fn direction_marginal(&self, ctx: &HitterContext) -> Result<[f64; 3], ShotModelError> {
        let table = self.lookup(ctx)?;
        Ok(table.map(|row| row.iter().sum()))
    }

    /// Outcome probabilities given that `direction` was chosen in `ctx`.
    pub fn outcome_conditional(
        &self,
        ctx: &HitterContext,
        direction: Direction,
    ) -> Result<OutcomeDistribution, ShotModelError> {
        ctx.check_direction(direction)?;
        let row = self.lookup(ctx)?[direction.slot()];
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            return Err(ShotModelError::UnsupportedDirection {
                context: *ctx,
                direction,
            });
        }
        Ok(OutcomeDistribution {
            error: row[0] / mass,
            winner: row[1] / mass,
            in_play: row[2] / mass,
        })
    }

    /// Samples the outcome of a shot. Consumes exactly one draw.
    pub fn sample_outcome(
        &self,
        ctx: &HitterContext,
        direction: Direction,
        rng: &mut RandomStream,
    ) -> Result<Outcome, ShotModelError> {
        let dist = self.outcome_conditional(ctx, direction)?;
        Ok(dist.sample(rng.uniform()))
    }

    /// Samples a direction from the context's marginal. Consumes one draw.
    pub fn sample_direction(&self, ctx: &HitterContext, rng: &mut RandomStream) -> Result<Direction, ShotModelError> {
        let marginal = self.direction_marginal(ctx)?;
        let legal = ctx.legal_directions();
        let total: f64 = marginal.iter().sum();
        let u = rng.uniform() * total;
        let mut acc = 0.0;
        let mut last_supported = None;
        for (slot, &p) in marginal.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_supported = Some(slot);
                if u < acc {
                    return Ok(legal[slot]);
                }
            }
        }
        // u landed in the rounding gap at the top of the CDF
        last_supported
            .map(|slot| legal[slot])
            .ok_or(ShotModelError::UnknownContext(*ctx))
    }

    /// Moves `fraction` of every cell's error mass onto its winner cell
    /// (negative values move winner mass onto errors). Marginals and row
    /// sums are unchanged.
    pub fn shift_terminal_mass(&self, fraction: f64) -> SkillProfile {
        let fraction = fraction.clamp(-1.0, 1.0);
        let mut out = self.clone();
        for table in out.tables.iter_mut().flatten() {
            for row in table.iter_mut() {
                let moved = if fraction >= 0.0 {
                    row[0] * fraction
                } else {
                    row[1] * fraction
                };
                row[0] -= moved;
                row[1] += moved;
            }
        }
        out
    }
}
