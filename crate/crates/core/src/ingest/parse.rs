//! Rally-string parser for charting notation.
//!
//! Grammar (bytes, no whitespace inside a rally):
//!
//! ```text
//! rally    := serve [shot*]
//! serve    := ('4' | '5' | '6') [serve_end]
//! serve_end:= '*' | '#'                     ace / unreturned serve
//!            | errloc+ ['@' | '#'] | '@'   fault
//! shot     := type ('1' | '2' | '3') [depth] [shot_end]
//! type     := f b r s v z o p u y l m h i j k t q
//! depth    := '7' | '8' | '9'               recorded, never modelled
//! shot_end := '*'                           winner
//!            | errloc* ('@' | '#')          error (unforced / forced)
//!            | errloc+                      error
//! errloc   := n w d x
//! ```
//!
//! Only the last element of a rally may end the point, and the last element
//! must end it. Anything else is a [`ParseError`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::shot::{Direction, ServeNumber};

pub const SHOT_TYPES: &[u8] = b"fbrsvzopuylmhijktq";
const ERROR_LOCATIONS: &[u8] = b"nwdx";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServeTerminal {
    Fault,
    Ace,
    InPlay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotTerminal {
    Winner,
    Error,
    InPlay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ServeAttempt {
    pub number: ServeNumber,
    pub direction: Direction,
    pub terminal: ServeTerminal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParsedShot {
    pub shot_type: char,
    pub direction: Direction,
    /// Depth digit 7–9. Kept for display only.
    pub depth: Option<u8>,
    pub terminal: ShotTerminal,
}

/// A parsed rally: one or two serve attempts followed by the shots after the
/// serve landed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedRally {
    pub serves: Vec<ServeAttempt>,
    pub shots: Vec<ParsedShot>,
    /// In-play (or ace) serve plus shots; faults excluded.
    pub rally_length: u32,
}

impl ParsedRally {
    /// The serve that started the rally proper, if one landed.
    pub fn landed_serve(&self) -> Option<&ServeAttempt> {
        self.serves.last().filter(|s| s.terminal != ServeTerminal::Fault)
    }

    pub fn is_double_fault(&self) -> bool {
        self.serves.len() == 2 && self.serves[1].terminal == ServeTerminal::Fault
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub reason: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.reason)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(offset: usize, reason: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        reason: reason.into(),
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn error_locations(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if ERROR_LOCATIONS.contains(&b)) {
            self.pos += 1;
        }
        self.pos - start
    }
}

/// Parses one serve attempt and everything after it.
pub fn parse_rally_string(s: &str, serve_number: ServeNumber) -> Result<ParsedRally, ParseError> {
    let trimmed = s.trim();
    let lead = s.len() - s.trim_start().len();
    let mut cur = Cursor {
        bytes: trimmed.as_bytes(),
        pos: 0,
    };
    let at = |cur: &Cursor| lead + cur.pos;

    let serve_dir = match cur.bump() {
        Some(b @ b'4'..=b'6') => Direction::serve(b - b'0').expect("serve digit"),
        Some(b) => return err(lead, format!("expected serve direction 4-6, found {:?}", b as char)),
        None => return err(lead, "empty rally string"),
    };
    let serve_terminal = match cur.peek() {
        Some(b'*') | Some(b'#') => {
            cur.bump();
            ServeTerminal::Ace
        }
        Some(b'@') => {
            cur.bump();
            ServeTerminal::Fault
        }
        Some(b) if ERROR_LOCATIONS.contains(&b) => {
            cur.error_locations();
            if matches!(cur.peek(), Some(b'@') | Some(b'#')) {
                cur.bump();
            }
            ServeTerminal::Fault
        }
        Some(_) => ServeTerminal::InPlay,
        None => return err(at(&cur), "rally ends without a terminal"),
    };
    let serve = ServeAttempt {
        number: serve_number,
        direction: serve_dir,
        terminal: serve_terminal,
    };
    if serve_terminal != ServeTerminal::InPlay {
        if !cur.at_end() {
            return err(at(&cur), "content after the point ended");
        }
        return Ok(ParsedRally {
            serves: vec![serve],
            shots: Vec::new(),
            rally_length: u32::from(serve_terminal == ServeTerminal::Ace),
        });
    }

    let mut shots = Vec::new();
    loop {
        let shot_type = match cur.bump() {
            Some(b) if SHOT_TYPES.contains(&b) => b as char,
            Some(b) => {
                return err(at(&cur) - 1, format!("unknown shot type {:?}", b as char));
            }
            None => return err(at(&cur), "rally ends without a terminal"),
        };
        let direction = match cur.bump() {
            Some(b @ b'1'..=b'3') => Direction::rally(b - b'0').expect("rally digit"),
            Some(b) => {
                return err(
                    at(&cur) - 1,
                    format!("expected shot direction 1-3, found {:?}", b as char),
                );
            }
            None => return err(at(&cur), "shot without direction"),
        };
        let depth = match cur.peek() {
            Some(b @ b'7'..=b'9') => {
                cur.bump();
                Some(b - b'0')
            }
            _ => None,
        };
        let located = cur.error_locations() > 0;
        let terminal = match cur.peek() {
            Some(b'*') if located => {
                return err(at(&cur), "winner marked with an error location");
            }
            Some(b'*') => {
                cur.bump();
                ShotTerminal::Winner
            }
            Some(b'@') | Some(b'#') => {
                cur.bump();
                ShotTerminal::Error
            }
            _ if located => ShotTerminal::Error,
            _ => ShotTerminal::InPlay,
        };
        shots.push(ParsedShot {
            shot_type,
            direction,
            depth,
            terminal,
        });
        if terminal != ShotTerminal::InPlay {
            if !cur.at_end() {
                return err(at(&cur), "content after the point ended");
            }
            break;
        }
    }
    let rally_length = 1 + shots.len() as u32;
    Ok(ParsedRally {
        serves: vec![serve],
        shots,
        rally_length,
    })
}

/// Parses a first-serve string and, after a fault, the second-serve string.
pub fn parse_point(first: &str, second: Option<&str>) -> Result<ParsedRally, ParseError> {
    let first_rally = parse_rally_string(first, ServeNumber::First)?;
    let faulted = first_rally.serves[0].terminal == ServeTerminal::Fault;
    let second = second.map(str::trim).filter(|s| !s.is_empty());
    match (faulted, second) {
        (false, None) => Ok(first_rally),
        (false, Some(_)) => err(0, "second serve recorded after a first serve that landed"),
        (true, None) => err(first.len(), "first-serve fault without a second serve"),
        (true, Some(s)) => {
            let mut second_rally = parse_rally_string(s, ServeNumber::Second)?;
            second_rally.serves.insert(0, first_rally.serves[0]);
            Ok(second_rally)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ace() {
        let r = parse_rally_string("6*", ServeNumber::First).unwrap();
        assert_eq!(
            r.serves,
            vec![ServeAttempt {
                number: ServeNumber::First,
                direction: Direction::T,
                terminal: ServeTerminal::Ace
            }]
        );
        assert!(r.shots.is_empty());
        assert_eq!(r.rally_length, 1);
    }

    #[test]
    fn three_shot_winner() {
        let r = parse_rally_string("4f18b3*", ServeNumber::First).unwrap();
        assert_eq!(r.serves[0].direction, Direction::WIDE);
        assert_eq!(r.serves[0].terminal, ServeTerminal::InPlay);
        assert_eq!(
            r.shots,
            vec![
                ParsedShot {
                    shot_type: 'f',
                    direction: Direction::FOREHAND_SIDE,
                    depth: Some(8),
                    terminal: ShotTerminal::InPlay
                },
                ParsedShot {
                    shot_type: 'b',
                    direction: Direction::BACKHAND_SIDE,
                    depth: None,
                    terminal: ShotTerminal::Winner
                },
            ]
        );
        assert_eq!(r.rally_length, 3);
    }

    #[test]
    fn second_serve_return_error() {
        let r = parse_rally_string("5f2n@", ServeNumber::Second).unwrap();
        assert_eq!(r.serves[0].number, ServeNumber::Second);
        assert_eq!(r.serves[0].direction, Direction::BODY);
        assert_eq!(r.shots.len(), 1);
        assert_eq!(r.shots[0].direction, Direction::MIDDLE);
        assert_eq!(r.shots[0].terminal, ShotTerminal::Error);
        assert_eq!(r.rally_length, 2);
    }

    #[test]
    fn faults_and_located_errors() {
        let r = parse_rally_string("4n", ServeNumber::First).unwrap();
        assert_eq!(r.serves[0].terminal, ServeTerminal::Fault);
        assert_eq!(r.rally_length, 0);
        let r = parse_rally_string("6wx", ServeNumber::First).unwrap();
        assert_eq!(r.serves[0].terminal, ServeTerminal::Fault);
        let r = parse_rally_string("4#", ServeNumber::First).unwrap();
        assert_eq!(r.serves[0].terminal, ServeTerminal::Ace);
        let r = parse_rally_string("5b2d", ServeNumber::First).unwrap();
        assert_eq!(r.shots[0].terminal, ShotTerminal::Error);
        let r = parse_rally_string("5b29w#", ServeNumber::First).unwrap();
        assert_eq!(r.shots[0].depth, Some(9));
        assert_eq!(r.shots[0].terminal, ShotTerminal::Error);
    }

    #[test]
    fn rejects_malformed() {
        for (s, offset) in [
            ("", 0),
            ("3f1*", 0),
            ("4", 1),
            ("4f1", 3),
            ("4f1*b2*", 4),
            ("4g1*", 1),
            ("4f4*", 2),
            ("4f1+b2*", 3),
            ("4f1n*", 4),
            ("6*x", 2),
            ("4f", 2),
        ] {
            let e = parse_rally_string(s, ServeNumber::First).unwrap_err();
            assert_eq!(e.offset, offset, "{s}: {e}");
        }
    }

    #[test]
    fn combines_double_fault() {
        let r = parse_point("4n", Some("5w")).unwrap();
        assert_eq!(r.serves.len(), 2);
        assert!(r.is_double_fault());
        assert_eq!(r.rally_length, 0);
        assert!(r.landed_serve().is_none());

        let r = parse_point("4n", Some("6f3*")).unwrap();
        assert_eq!(r.serves[1].number, ServeNumber::Second);
        assert_eq!(r.landed_serve().unwrap().direction, Direction::T);
        assert_eq!(r.rally_length, 2);

        assert!(parse_point("4n", None).is_err());
        assert!(parse_point("4n", Some("  ")).is_err());
        assert!(parse_point("6*", Some("5*")).is_err());
        assert!(parse_point("6*", Some("")).is_ok());
    }

    proptest! {
        #[test]
        fn never_panics_on_arbitrary_input(s in ".{0,40}") {
            let _ = parse_rally_string(&s, ServeNumber::First);
        }

        #[test]
        fn never_panics_on_notation_alphabet(s in "[0-9fbrsvzopuylmhijktqnwdx*@#+;=-]{0,20}") {
            if let Ok(r) = parse_rally_string(&s, ServeNumber::Second) {
                let terminal_shots = r.shots.iter().filter(|x| x.terminal != ShotTerminal::InPlay).count();
                prop_assert!(terminal_shots <= 1);
                if let Some((last, rest)) = r.shots.split_last() {
                    prop_assert!(last.terminal != ShotTerminal::InPlay);
                    prop_assert!(rest.iter().all(|x| x.terminal == ShotTerminal::InPlay));
                }
                let landed = u32::from(r.serves[0].terminal != ServeTerminal::Fault);
                prop_assert_eq!(r.rally_length, landed + r.shots.len() as u32);
            }
        }
    }
}
