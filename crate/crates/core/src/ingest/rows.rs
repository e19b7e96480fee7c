//! CSV rows to [`RallyRow`]s through a user-supplied column mapping.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{IngestError, RallyRow, RowError};
use crate::shot::Side;

/// How the server and returner names are found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlayerColumns {
    /// Explicit name columns.
    Columns { server: String, returner: String },
    /// Names embedded in the match id
    /// (`date-gender-tournament-round-First_Player-Second_Player`) and a
    /// column holding 1 or 2 for the server.
    MatchId { server_index: String },
}

/// How the serving side is found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum SideColumn {
    /// A column whose values name the side.
    Column {
        column: String,
        deuce: Vec<String>,
        advantage: Vec<String>,
    },
    /// Derived from the point score before the point (`15-0`, `40-AD`,
    /// tiebreak `3-2`) by the parity of points played.
    PointScore { column: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    pub schema_version: String,
    pub match_id: String,
    pub first_serve: String,
    pub second_serve: String,
    pub players: PlayerColumns,
    pub side: SideColumn,
}

impl ColumnMapping {
    /// Column layout of the public charting points files.
    pub fn charting_default() -> Self {
        Self {
            schema_version: "1".into(),
            match_id: "match_id".into(),
            first_serve: "1st".into(),
            second_serve: "2nd".into(),
            players: PlayerColumns::MatchId {
                server_index: "Svr".into(),
            },
            side: SideColumn::PointScore { column: "Pts".into() },
        }
    }

    fn columns(&self) -> Vec<&str> {
        let mut cols = vec![
            self.match_id.as_str(),
            self.first_serve.as_str(),
            self.second_serve.as_str(),
        ];
        match &self.players {
            PlayerColumns::Columns { server, returner } => {
                cols.push(server);
                cols.push(returner);
            }
            PlayerColumns::MatchId { server_index } => cols.push(server_index),
        }
        match &self.side {
            SideColumn::Column { column, .. } | SideColumn::PointScore { column } => cols.push(column),
        }
        cols
    }
}

/// Splits a charting match id into the two player names (underscores become
/// spaces). Player names may contain hyphens; a split is accepted only when
/// exactly one split point leaves an underscore on both sides.
pub fn players_from_match_id(match_id: &str) -> Option<(String, String)> {
    let parts: Vec<&str> = match_id.split('-').collect();
    let names = parts.get(4..)?;
    if names.len() < 2 {
        return None;
    }
    let candidates: Vec<usize> = (1..names.len())
        .filter(|&k| {
            let (a, b) = names.split_at(k);
            a.iter().any(|s| s.contains('_')) && b.iter().any(|s| s.contains('_'))
        })
        .collect();
    let k = match candidates.as_slice() {
        [k] => *k,
        [] if names.len() == 2 => 1,
        _ => return None,
    };
    let clean = |s: &[&str]| s.join("-").replace('_', " ");
    Some((clean(&names[..k]), clean(&names[k..])))
}

/// Points already played in the game from a score like `30-15` or `40-AD`;
/// plain integers are read as tiebreak points.
pub fn points_played(score: &str) -> Option<u32> {
    let (a, b) = score.trim().split_once('-')?;
    let game = |s: &str| match s.trim().to_ascii_uppercase().as_str() {
        "0" => Some(0),
        "15" => Some(1),
        "30" => Some(2),
        "40" => Some(3),
        "AD" | "A" => Some(4),
        _ => None,
    };
    match (game(a), game(b)) {
        (Some(x), Some(y)) => Some(x + y),
        _ => Some(a.trim().parse::<u32>().ok()? + b.trim().parse::<u32>().ok()?),
    }
}

/// Streams rows out of a CSV reader. Header problems are fatal; per-row
/// problems come back as `Err(RowError)` items for the caller to skip.
pub fn read_rows<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
) -> Result<impl Iterator<Item = Result<RallyRow, RowError>>, IngestError> {
    if mapping.schema_version != "1" {
        return Err(IngestError::Mapping(format!(
            "unsupported mapping schema_version {:?}",
            mapping.schema_version
        )));
    }
    let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| IngestError::Mapping(format!("cannot read CSV header: {e}")))?
        .clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
    let mut positions = HashMap::new();
    for col in mapping.columns() {
        let Some(&i) = index.get(col) else {
            return Err(IngestError::Mapping(format!("CSV has no column {col:?}")));
        };
        positions.insert(col.to_string(), i);
    }
    let mapping = mapping.clone();
    Ok(csv.into_records().enumerate().map(move |(i, rec)| {
        // header is line 1
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| RowError {
            line,
            reason: e.to_string(),
        })?;
        let field = |col: &str| rec.get(positions[col]).unwrap_or("").trim().to_string();
        let fail = |reason: String| RowError { line, reason };

        let match_id = field(&mapping.match_id);
        let (server_name, returner_name) = match &mapping.players {
            PlayerColumns::Columns { server, returner } => (field(server), field(returner)),
            PlayerColumns::MatchId { server_index } => {
                let (p1, p2) = players_from_match_id(&match_id)
                    .ok_or_else(|| fail(format!("cannot read player names from {match_id:?}")))?;
                match field(server_index).as_str() {
                    "1" => (p1, p2),
                    "2" => (p2, p1),
                    other => return Err(fail(format!("server index {other:?} is not 1 or 2"))),
                }
            }
        };
        if server_name.is_empty() || returner_name.is_empty() {
            return Err(fail("empty player name".into()));
        }
        let side = match &mapping.side {
            SideColumn::Column {
                column,
                deuce,
                advantage,
            } => {
                let v = field(column);
                if deuce.iter().any(|d| d == &v) {
                    Side::Deuce
                } else if advantage.iter().any(|a| a == &v) {
                    Side::Advantage
                } else {
                    return Err(fail(format!("unknown side value {v:?}")));
                }
            }
            SideColumn::PointScore { column } => {
                let v = field(column);
                Side::from_points_played(
                    points_played(&v).ok_or_else(|| fail(format!("cannot read point score {v:?}")))?,
                )
            }
        };
        let first_serve = field(&mapping.first_serve);
        if first_serve.is_empty() {
            return Err(fail("empty first-serve string".into()));
        }
        let second = field(&mapping.second_serve);
        Ok(RallyRow {
            line,
            match_id,
            server_name,
            returner_name,
            side,
            first_serve,
            second_serve: (!second.is_empty()).then_some(second),
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn match_id_names() {
        assert_eq!(
            players_from_match_id("20230605-M-Roland_Garros-R16-Novak_Djokovic-Juan_Pablo_Varillas"),
            Some(("Novak Djokovic".into(), "Juan Pablo Varillas".into()))
        );
        assert_eq!(
            players_from_match_id("20171105-M-Paris_Masters-F-Jo-Wilfried_Tsonga-Rafael_Nadal"),
            Some(("Jo-Wilfried Tsonga".into(), "Rafael Nadal".into()))
        );
        // hyphenated surname next to another name is ambiguous
        assert_eq!(
            players_from_match_id("20200101-M-X-R32-Felix_Auger-Aliassime-Rafael_Nadal"),
            None
        );
        assert_eq!(players_from_match_id("20200101-M-X"), None);
    }

    #[test]
    fn point_scores() {
        assert_eq!(points_played("0-0"), Some(0));
        assert_eq!(points_played("15-0"), Some(1));
        assert_eq!(points_played("40-AD"), Some(7));
        assert_eq!(points_played("40-40"), Some(6));
        assert_eq!(points_played("3-2"), Some(5));
        assert_eq!(points_played("x"), None);
    }

    #[test]
    fn reads_charting_layout() {
        let csv = "match_id,Pt,Svr,Pts,1st,2nd\n\
                   20230101-M-Open-R32-Ann_Able-Bea_Baker,1,1,0-0,4f18b3*,\n\
                   20230101-M-Open-R32-Ann_Able-Bea_Baker,2,1,15-0,4n,6*\n\
                   20230101-M-Open-R32-Ann_Able-Bea_Baker,3,2,0-0,6*,\n\
                   20230101-M-Open-R32-Ann_Able-Bea_Baker,4,3,0-0,6*,\n";
        let rows: Vec<_> = read_rows(csv.as_bytes(), &ColumnMapping::charting_default())
            .unwrap()
            .collect();
        assert_eq!(rows.len(), 4);
        let r0 = rows[0].as_ref().unwrap();
        assert_eq!(r0.server_name, "Ann Able");
        assert_eq!(r0.side, Side::Deuce);
        assert_eq!(r0.second_serve, None);
        let r1 = rows[1].as_ref().unwrap();
        assert_eq!(r1.side, Side::Advantage);
        assert_eq!(r1.second_serve.as_deref(), Some("6*"));
        assert_eq!(rows[2].as_ref().unwrap().server_name, "Bea Baker");
        assert_eq!(rows[3].as_ref().unwrap_err().line, 5);
    }

    #[test]
    fn missing_column_is_fatal() {
        let csv = "match_id,1st\n";
        assert!(matches!(
            read_rows(csv.as_bytes(), &ColumnMapping::charting_default()),
            Err(IngestError::Mapping(_))
        ));
    }

    #[test]
    fn explicit_columns() {
        let mapping: ColumnMapping = serde_json::from_str(
            r#"{"schema_version":"1","match_id":"m","first_serve":"a","second_serve":"b",
                "players":{"source":"columns","server":"s","returner":"r"},
                "side":{"source":"column","column":"side","deuce":["D"],"advantage":["A"]}}"#,
        )
        .unwrap();
        let csv = "m,s,r,side,a,b\nx,P,Q,A,6*,\n";
        let rows: Vec<_> = read_rows(csv.as_bytes(), &mapping).unwrap().collect();
        let r = rows[0].as_ref().unwrap();
        assert_eq!((r.server_name.as_str(), r.returner_name.as_str()), ("P", "Q"));
        assert_eq!(r.side, Side::Advantage);
    }
}
