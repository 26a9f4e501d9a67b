//! Nagata covers: `s`-multiplicity, cover verification, the splitting of
//! a bounded cover into separated colour classes, hierarchical coverings,
//! transport of covers through an involution, and an exhaustive oracle.
//!
//! A family is `D`-bounded when every member has diameter at most `D`.
//! Its `s`-multiplicity is the largest number of members met by a single
//! set of diameter at most `s`.

mod brute;
mod hierarchy;
mod multiplicity;
mod split;
mod transport;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qspace::{ExtRational, FiniteQSpace, PointSet, QSpaceError};

pub use brute::{nagata_bruteforce, BruteForce, MAX_BRUTE_POINTS};
pub use hierarchy::{
    build_hierarchical, level_window, verify_hierarchical, HierCovering, HierCoveringFile, HierReport, Level,
    PropertyCheck,
};
pub use multiplicity::{
    for_each_maximal_clique, s_multiplicity, separated, verify_nagata_cover, verify_nagata_cover_on, Multiplicity,
    NagataCheck,
};
pub use split::{split_cover, SplitCover};
pub use transport::{
    general_branch_range, transport_cover_nagata, transport_domain, Constants, NagataTransport, TransportBranch,
    TransportConstants,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NagataError {
    #[error("family member {0} is empty")]
    EmptyMember(usize),
    #[error("family member {0} contains the point at infinity")]
    InfinityMember(usize),
    #[error("scale must be positive")]
    NonPositiveScale,
    #[error("base r must exceed 1")]
    BadBase,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
    #[error("hierarchy fails property {property} after merging ({detail}); try r = {suggested_r}")]
    IncreaseBase { property: String, detail: String, suggested_r: String },
    #[error("level window [{j_min}, {j_max}] is too small to certify j({point}); extend it")]
    WindowTooSmall { point: String, j_min: i32, j_max: i32 },
    #[error("brute force supports at most {max} ordinary points, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error("invalid family file: {0}")]
    Format(String),
    #[error(transparent)]
    Space(#[from] QSpaceError),
}

/// A family of point sets of one space with optional metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFamily {
    pub sets: Vec<PointSet>,
    pub s: Option<BigRational>,
    pub c: Option<BigRational>,
    pub color: Option<usize>,
    pub level: Option<i32>,
}

/// On-disk form of a family: member sets by label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub sets: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<ExtRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<ExtRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i32>,
}

impl SetFamily {
    /// A family without metadata. Members must be nonempty and avoid the
    /// point at infinity.
    pub fn new(space: &FiniteQSpace, sets: Vec<PointSet>) -> Result<Self, NagataError> {
        for (i, set) in sets.iter().enumerate() {
            if set.is_clear() {
                return Err(NagataError::EmptyMember(i));
            }
            if space.infinity().is_some_and(|w| set.contains(w)) {
                return Err(NagataError::InfinityMember(i));
            }
        }
        Ok(Self { sets, s: None, c: None, color: None, level: None })
    }

    pub fn from_labels<S: AsRef<str>>(space: &FiniteQSpace, sets: &[Vec<S>]) -> Result<Self, NagataError> {
        let sets = sets.iter().map(|m| space.set_from_labels(m)).collect::<Result<Vec<_>, _>>()?;
        Self::new(space, sets)
    }

    pub fn from_file(space: &FiniteQSpace, file: &FamilyFile) -> Result<Self, NagataError> {
        let finite = |v: &Option<ExtRational>, what: &str| -> Result<Option<BigRational>, NagataError> {
            match v {
                None => Ok(None),
                Some(x) => x
                    .as_finite()
                    .cloned()
                    .map(Some)
                    .ok_or_else(|| NagataError::Format(format!("{what} must be finite"))),
            }
        };
        let mut fam = Self::from_labels(space, &file.sets)?;
        fam.s = finite(&file.s, "s")?;
        fam.c = finite(&file.c, "c")?;
        fam.color = file.color;
        fam.level = file.level;
        Ok(fam)
    }

    pub fn from_json(space: &FiniteQSpace, text: &str) -> Result<Self, NagataError> {
        let file: FamilyFile = serde_json::from_str(text).map_err(|e| NagataError::Format(e.to_string()))?;
        Self::from_file(space, &file)
    }

    pub fn to_file(&self, space: &FiniteQSpace) -> FamilyFile {
        FamilyFile {
            sets: self.sets.iter().map(|s| space.set_labels(s)).collect(),
            s: self.s.clone().map(ExtRational::from),
            c: self.c.clone().map(ExtRational::from),
            color: self.color,
            level: self.level,
        }
    }

    pub fn to_json(&self, space: &FiniteQSpace) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file(space)).expect("family serialization");
        s.push('\n');
        s
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Removes empty sets and repeated point sets, keeping first occurrences.
pub(crate) fn dedup_sets(sets: Vec<PointSet>) -> Vec<PointSet> {
    let mut out: Vec<PointSet> = Vec::with_capacity(sets.len());
    for s in sets {
        if !s.is_clear() && !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspace::{line_space, parse_rational};

    #[test]
    fn family_file_round_trip() {
        let s = line_space(&["0", "1", "2", "4"].map(|v| parse_rational(v).unwrap())).unwrap();
        let text = r#"{"sets": [["0","1"], ["2"], ["4"]], "s": "1/2", "c": "3"}"#;
        let fam = SetFamily::from_json(&s, text).unwrap();
        assert_eq!(fam.len(), 3);
        assert_eq!(fam.s, Some(parse_rational("1/2").unwrap()));
        let again = SetFamily::from_json(&s, &fam.to_json(&s)).unwrap();
        assert_eq!(again, fam);
    }

    #[test]
    fn members_are_checked() {
        let s = line_space(&["0", "1"].map(|v| parse_rational(v).unwrap())).unwrap();
        assert_eq!(SetFamily::new(&s, vec![s.empty_set()]), Err(NagataError::EmptyMember(0)));
        let e = s.extend_with_infinity().unwrap();
        let inf: Vec<Vec<&str>> = vec![vec!["0"], vec!["inf"]];
        assert_eq!(SetFamily::from_labels(&e, &inf), Err(NagataError::InfinityMember(1)));
        assert!(matches!(SetFamily::from_json(&s, r#"{"sets": [["7"]]}"#), Err(NagataError::Space(_))));
        assert!(matches!(SetFamily::from_json(&s, r#"{"sets": [], "x": 1}"#), Err(NagataError::Format(_))));
    }
}
