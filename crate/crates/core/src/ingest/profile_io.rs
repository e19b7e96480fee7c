//! Canonical profile JSON.
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "provenance": "...",
//!   "tables": [
//!     {
//!       "context": {"variant": "serve", "side": "deuce", "serve_number": "first"},
//!       "probabilities": [[e, w, i], [e, w, i], [e, w, i]]
//!     }
//!   ]
//! }
//! ```
//!
//! Rows of `probabilities` are directions in code order (1..3 or 4..6),
//! columns are error, winner, in play. Numbers are written in shortest
//! round-trip form, so save then load is bit-exact.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::shot::{HitterContext, JointTable, SkillProfile, ValidationReport};

pub const PROFILE_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ProfileIoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("invalid profile:\n{0}")]
    Invalid(ValidationReport),
}

fn schema<T>(pointer: impl Into<String>, message: impl Into<String>) -> Result<T, ProfileIoError> {
    Err(ProfileIoError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    })
}

#[derive(Serialize)]
struct TableDoc<'a> {
    context: HitterContext,
    probabilities: &'a JointTable,
}

#[derive(Serialize)]
struct ProfileDoc<'a> {
    schema_version: &'static str,
    provenance: &'a str,
    tables: Vec<TableDoc<'a>>,
}

/// Serializes a valid profile. Invalid profiles are refused.
pub fn save_profile(profile: &SkillProfile) -> Result<String, ProfileIoError> {
    let report = profile.validate();
    if !report.is_valid() {
        return Err(ProfileIoError::Invalid(report));
    }
    let doc = ProfileDoc {
        schema_version: PROFILE_SCHEMA_VERSION,
        provenance: &profile.provenance,
        tables: profile
            .tables()
            .map(|(context, probabilities)| TableDoc { context, probabilities })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Parses and validates a profile document.
pub fn load_profile(text: &str) -> Result<SkillProfile, ProfileIoError> {
    let root: Value = serde_json::from_str(text)?;
    let Value::Object(root) = root else {
        return schema("", "expected an object");
    };
    for key in root.keys() {
        if !matches!(key.as_str(), "schema_version" | "provenance" | "tables") {
            return schema(format!("/{key}"), "unknown field");
        }
    }
    match root.get("schema_version") {
        Some(Value::String(v)) if v == PROFILE_SCHEMA_VERSION => {}
        Some(v) => return schema("/schema_version", format!("unsupported version {v}")),
        None => return schema("/schema_version", "missing"),
    }
    let provenance = match root.get("provenance") {
        Some(Value::String(p)) => p.clone(),
        Some(_) => return schema("/provenance", "expected a string"),
        None => return schema("/provenance", "missing"),
    };
    let tables = match root.get("tables") {
        Some(Value::Array(t)) => t,
        Some(_) => return schema("/tables", "expected an array"),
        None => return schema("/tables", "missing"),
    };
    let mut profile = SkillProfile::empty(provenance);
    let mut seen = BTreeSet::new();
    for (i, entry) in tables.iter().enumerate() {
        let base = format!("/tables/{i}");
        let Value::Object(entry) = entry else {
            return schema(base, "expected an object");
        };
        let context = parse_context(entry, &base)?;
        if !seen.insert(context.index()) {
            return schema(format!("{base}/context"), format!("duplicate context {context}"));
        }
        let table = parse_table(entry, &base)?;
        profile.set_table(context, table);
    }
    let report = profile.validate();
    if !report.is_valid() {
        return Err(ProfileIoError::Invalid(report));
    }
    Ok(profile)
}

fn parse_context(entry: &Map<String, Value>, base: &str) -> Result<HitterContext, ProfileIoError> {
    let pointer = format!("{base}/context");
    let Some(raw) = entry.get("context") else {
        return schema(pointer, "missing");
    };
    let context: HitterContext = match serde_json::from_value(raw.clone()) {
        Ok(c) => c,
        Err(e) => return schema(pointer, e.to_string()),
    };
    if let Err(e) = context.check() {
        return schema(pointer, e.to_string());
    }
    Ok(context)
}

fn parse_table(entry: &Map<String, Value>, base: &str) -> Result<JointTable, ProfileIoError> {
    let pointer = format!("{base}/probabilities");
    let Some(Value::Array(rows)) = entry.get("probabilities") else {
        return schema(pointer, "expected a 3x3 array");
    };
    if rows.len() != 3 {
        return schema(pointer, format!("expected 3 rows, found {}", rows.len()));
    }
    let mut table = [[0.0; 3]; 3];
    for (d, row) in rows.iter().enumerate() {
        let Value::Array(cells) = row else {
            return schema(format!("{pointer}/{d}"), "expected an array of 3 numbers");
        };
        if cells.len() != 3 {
            return schema(
                format!("{pointer}/{d}"),
                format!("expected 3 cells, found {}", cells.len()),
            );
        }
        for (o, cell) in cells.iter().enumerate() {
            match cell.as_f64() {
                Some(x) => table[d][o] = x,
                None => return schema(format!("{pointer}/{d}/{o}"), "expected a number"),
            }
        }
    }
    Ok(table)
}
