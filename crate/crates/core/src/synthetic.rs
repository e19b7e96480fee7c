//! Hand-parameterized profiles for tests, demos and fixture generation.

use serde::{Deserialize, Serialize};

use crate::shot::{Direction, HitterContext, JointTable, ServeNumber, SkillProfile};

/// Per-shot outcome rates of a synthetic player. Each `(error, winner)` pair
/// is conditional on the shot being hit; the rest is in play.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlayerParams {
    pub first_serve: (f64, f64),
    pub second_serve: (f64, f64),
    pub return_shot: (f64, f64),
    pub rally_shot: (f64, f64),
    /// Extra winner rate when a rally shot changes direction relative to the
    /// previous shot, taken from the in-play share.
    pub change_of_direction: f64,
    /// Direction preferences, normalized before use.
    pub serve_directions: [f64; 3],
    pub rally_directions: [f64; 3],
}

impl Default for PlayerParams {
    fn default() -> Self {
        Self {
            first_serve: (0.38, 0.08),
            second_serve: (0.09, 0.02),
            return_shot: (0.20, 0.03),
            rally_shot: (0.13, 0.05),
            change_of_direction: 0.03,
            serve_directions: [0.4, 0.2, 0.4],
            rally_directions: [0.35, 0.35, 0.3],
        }
    }
}

fn normalize(w: [f64; 3]) -> [f64; 3] {
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.map(|x| x / s)
    } else {
        [1.0 / 3.0; 3]
    }
}

impl PlayerParams {
    fn table(&self, ctx: &HitterContext) -> JointTable {
        let mut table = [[0.0; 3]; 3];
        match *ctx {
            HitterContext::Serve { serve_number, .. } => {
                let (e, w) = match serve_number {
                    ServeNumber::First => self.first_serve,
                    ServeNumber::Second => self.second_serve,
                };
                let m = normalize(self.serve_directions);
                for d in 0..3 {
                    table[d] = [m[d] * e, m[d] * w, m[d] * (1.0 - e - w)];
                }
            }
            HitterContext::Return { .. } => {
                let (e, w) = self.return_shot;
                let m = normalize(self.rally_directions);
                for d in 0..3 {
                    table[d] = [m[d] * e, m[d] * w, m[d] * (1.0 - e - w)];
                }
            }
            HitterContext::Rally { previous_direction, .. } => {
                let (e, base_w) = self.rally_shot;
                let m = normalize(self.rally_directions);
                for (d, dir) in Direction::RALLY.iter().enumerate() {
                    let w = if *dir == previous_direction {
                        base_w
                    } else {
                        (base_w + self.change_of_direction).min(1.0 - e)
                    };
                    table[d] = [m[d] * e, m[d] * w, m[d] * (1.0 - e - w)];
                }
            }
        }
        table
    }

    /// Builds the 28-context profile. Valid whenever every rate pair has
    /// non-negative entries summing to at most 1 with a positive sum.
    pub fn profile(&self, provenance: impl Into<String>) -> SkillProfile {
        SkillProfile::from_fn(provenance, |ctx| self.table(ctx))
    }

    /// A stronger variant: `edge` of every error rate is converted into
    /// winners.
    pub fn with_edge(&self, edge: f64) -> PlayerParams {
        let shift = |(e, w): (f64, f64)| {
            let moved = e * edge.clamp(-1.0, 1.0);
            let moved = moved.max(-w);
            (e - moved, w + moved)
        };
        PlayerParams {
            first_serve: shift(self.first_serve),
            second_serve: shift(self.second_serve),
            return_shot: shift(self.return_shot),
            rally_shot: shift(self.rally_shot),
            ..*self
        }
    }
}
