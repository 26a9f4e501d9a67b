//! The JSON space file format.
//!
//! ```json
//! {"points": ["a", "b", "c"], "infinity": null,
//!  "dist": [["0", "1", "3/2"], ["1", "0", "1"], ["3/2", "1", "0"]]}
//! ```
//!
//! Entries are `p`, `p/q` or `inf`. Parsing checks shape and entry syntax
//! only; the metric axioms are checked by [`super::validate`].

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ext::{ExtRational, ParseExtError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("distance matrix has {rows} rows but {points} points are listed")]
    RowCount { rows: usize, points: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({row}, {col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        #[source]
        source: ParseExtError,
    },
    #[error("duplicate point label `{0}`")]
    DuplicateLabel(String),
    #[error("a space needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("infinity label `{0}` is not among the points")]
    UnknownInfinity(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    points: Vec<String>,
    #[serde(default)]
    infinity: Option<String>,
    dist: Vec<Vec<String>>,
}

/// Candidate space data: well-formed but not yet checked against the
/// quasi-metric axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceData {
    pub points: Vec<String>,
    pub infinity: Option<String>,
    pub dist: Vec<Vec<ExtRational>>,
}

impl SpaceData {
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let file: SpaceFile =
            serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
        let n = file.points.len();
        let mut seen = HashSet::new();
        for label in &file.points {
            if !seen.insert(label.as_str()) {
                return Err(ParseError::DuplicateLabel(label.clone()));
            }
        }
        if n < 3 {
            return Err(ParseError::TooFewPoints(n));
        }
        if file.dist.len() != n {
            return Err(ParseError::RowCount { rows: file.dist.len(), points: n });
        }
        let mut dist = Vec::with_capacity(n);
        for (row, entries) in file.dist.iter().enumerate() {
            if entries.len() != n {
                return Err(ParseError::NotSquare { row, len: entries.len(), expected: n });
            }
            let parsed = entries
                .iter()
                .enumerate()
                .map(|(col, e)| e.parse().map_err(|source| ParseError::Entry { row, col, source }))
                .collect::<Result<Vec<ExtRational>, _>>()?;
            dist.push(parsed);
        }
        if let Some(inf) = &file.infinity {
            if !seen.contains(inf.as_str()) {
                return Err(ParseError::UnknownInfinity(inf.clone()));
            }
        }
        Ok(SpaceData { points: file.points, infinity: file.infinity, dist })
    }

    /// Canonical serialization: points in stored order, rationals in lowest
    /// terms, two-space indentation, trailing newline.
    pub fn to_json(&self) -> String {
        let file = SpaceFile {
            points: self.points.clone(),
            infinity: self.infinity.clone(),
            dist: self
                .dist
                .iter()
                .map(|row| row.iter().map(ToString::to_string).collect())
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("space serialization");
        out.push('\n');
        out
    }

    pub fn infinity_index(&self) -> Option<usize> {
        let label = self.infinity.as_ref()?;
        self.points.iter().position(|p| p == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"points":["0","1","2","4"],"infinity":null,
        "dist":[["0","1","2","4"],["1","0","1","3"],["2","1","0","2"],["4","3","2","0"]]}"#;

    #[test]
    fn parses_line_space() {
        let data = SpaceData::from_json(LINE).unwrap();
        assert_eq!(data.points.len(), 4);
        assert_eq!(data.dist[3][1].to_string(), "3");
        assert_eq!(data.infinity_index(), None);
    }

    #[test]
    fn round_trip_is_stable() {
        let data = SpaceData::from_json(LINE).unwrap();
        let text = data.to_json();
        assert_eq!(SpaceData::from_json(&text).unwrap().to_json(), text);
    }

    #[test]
    fn rejects_malformed_input() {
        let ragged = r#"{"points":["a","b","c"],"dist":[["0","1","1"],["1","0"],["1","1","0"]]}"#;
        assert!(matches!(SpaceData::from_json(ragged), Err(ParseError::NotSquare { row: 1, .. })));
        let negative = r#"{"points":["a","b","c"],"dist":[["0","-1","1"],["1","0","1"],["1","1","0"]]}"#;
        assert!(matches!(
            SpaceData::from_json(negative),
            Err(ParseError::Entry { row: 0, col: 1, source: ParseExtError::Negative(_) })
        ));
        let small = r#"{"points":["a","b"],"dist":[["0","1"],["1","0"]]}"#;
        assert_eq!(SpaceData::from_json(small), Err(ParseError::TooFewPoints(2)));
        let dup = r#"{"points":["a","a","c"],"dist":[["0","1","1"],["1","0","1"],["1","1","0"]]}"#;
        assert!(matches!(SpaceData::from_json(dup), Err(ParseError::DuplicateLabel(_))));
        let unknown = r#"{"points":["a","b","c"],"infinity":"z","dist":[["0","1","1"],["1","0","1"],["1","1","0"]]}"#;
        assert!(matches!(SpaceData::from_json(unknown), Err(ParseError::UnknownInfinity(_))));
        let extra = r#"{"points":["a","b","c"],"dist":[],"extra":1}"#;
        assert!(matches!(SpaceData::from_json(extra), Err(ParseError::Json(_))));
    }
}
