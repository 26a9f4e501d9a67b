//! Splitting a bounded cover of low multiplicity into separated colour
//! classes.
//!
//! Input: a `cK^{2n}s`-bounded cover `𝓑` of the ordinary points with
//! `K^{2n}s`-multiplicity at most `n+1`. With `N^0 B = B` and `N^i B` the
//! closed `s`-neighbourhood of `N^{i-1} B`, class `i` (for `1 <= i <= n+1`)
//! consists of the nonempty sets
//!
//! ```text
//! ⋂_{j=1..i} N^{i-1} B_j  \  ⋃_{B ∉ {B_1..B_i}} N^i B
//! ```
//!
//! over `i` distinct members `B_1..B_i`. A point `x` of such a set has
//! exactly `{B_1..B_i}` as the members whose `N^{i-1}` contains it, so the
//! index sets to try are read off the points instead of enumerating all
//! `i`-subsets.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed};
use serde::Serialize;

use super::multiplicity::{s_multiplicity, verify_nagata_cover, NagataCheck};
use super::{dedup_sets, NagataError, SetFamily};
use crate::qspace::{ExtRational, FiniteQSpace, PointSet};

#[derive(Debug, Clone, Serialize)]
pub struct SplitCover {
    /// `n+1` families, class `i` at index `i-1`.
    #[serde(skip)]
    pub families: Vec<Vec<PointSet>>,
    /// `max(c, 1)`.
    pub c_eff: String,
    /// `c_eff K^{4n} s`.
    pub bound: String,
    /// Per-family check with bound `c_eff K^{4n} s` and multiplicity 1; the
    /// covering flag refers to the family alone.
    pub family_checks: Vec<NagataCheck>,
    /// Whether the union of all families covers the ordinary points.
    pub covers: bool,
}

impl SplitCover {
    /// All members of all families.
    pub fn union(&self) -> Vec<PointSet> {
        self.families.iter().flatten().cloned().collect()
    }
}

/// Splits `cover` into `n+1` families that are `max(c,1)K^{4n}s`-bounded
/// with `s`-multiplicity at most one each. The precondition is checked
/// first and all postconditions are re-verified.
pub fn split_cover(
    space: &FiniteQSpace,
    cover: &[PointSet],
    s: &BigRational,
    n: usize,
    c: &BigRational,
) -> Result<SplitCover, NagataError> {
    if !s.is_positive() {
        return Err(NagataError::NonPositiveScale);
    }
    SetFamily::new(space, cover.to_vec())?;
    let k = space.quasi_constant().clone();
    let c_eff = if c > &BigRational::one() { c.clone() } else { BigRational::one() };
    let k2n: BigRational = Pow::pow(&k, 2 * n as u32);
    let pre_scale = ExtRational::from(&k2n * s);
    let pre_bound = ExtRational::from(&c_eff * &k2n * s);
    let pre = verify_nagata_cover(space, cover, &pre_scale, &pre_bound, n + 1);
    if !pre.ok {
        return Err(NagataError::Precondition(describe(&pre, "K^{2n}s")));
    }

    let cover = dedup_sets(cover.to_vec());
    let ordinary = space.ordinary_set();
    let s_ext = ExtRational::from(s.clone());
    let balls: Vec<PointSet> = (0..space.len())
        .map(|x| {
            if space.is_ordinary(x) {
                let mut b = space.ball(x, &s_ext);
                b.intersect_with(&ordinary);
                b
            } else {
                space.empty_set()
            }
        })
        .collect();
    let grow = |set: &PointSet| -> PointSet {
        let mut out = set.clone();
        for x in set.ones() {
            out.union_with(&balls[x]);
        }
        out
    };
    // nbhd[i][b] = N^i B_b
    let mut nbhd: Vec<Vec<PointSet>> = vec![cover
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.intersect_with(&ordinary);
            b
        })
        .collect()];
    for i in 1..=n + 1 {
        let next = nbhd[i - 1].iter().map(&grow).collect();
        nbhd.push(next);
    }

    let m = cover.len();
    let mut families = Vec::with_capacity(n + 1);
    for i in 1..=n + 1 {
        let mut seen: HashSet<FixedBitSet> = HashSet::new();
        let mut family = Vec::new();
        for x in ordinary.ones() {
            let mut t = FixedBitSet::with_capacity(m);
            for b in 0..m {
                if nbhd[i - 1][b].contains(x) {
                    t.insert(b);
                }
            }
            if t.count_ones(..) != i || !seen.insert(t.clone()) {
                continue;
            }
            let mut a = ordinary.clone();
            for b in t.ones() {
                a.intersect_with(&nbhd[i - 1][b]);
            }
            for b in (0..m).filter(|b| !t.contains(*b)) {
                a.difference_with(&nbhd[i][b]);
            }
            if !a.is_clear() {
                family.push(a);
            }
        }
        families.push(family);
    }

    let k4n: BigRational = Pow::pow(&k, 4 * n as u32);
    let bound = &c_eff * &k4n * s;
    let bound_ext = ExtRational::from(bound.clone());
    let family_checks: Vec<NagataCheck> =
        families.iter().map(|f| verify_nagata_cover(space, f, &s_ext, &bound_ext, 1)).collect();
    let all: Vec<PointSet> = families.iter().flatten().cloned().collect();
    let mut union = space.empty_set();
    for a in &all {
        union.union_with(a);
    }
    let covers = ordinary.is_subset(&union);
    if !covers {
        let missing = space.set_labels(&ordinary.difference(&union).collect());
        return Err(NagataError::Postcondition(format!("points {missing:?} are not covered")));
    }
    for (i, check) in family_checks.iter().enumerate() {
        if !check.bounded || check.multiplicity > 1 {
            return Err(NagataError::Postcondition(format!(
                "family {}: oversized {:?}, multiplicity {} (witness {:?})",
                i + 1,
                check.oversized,
                check.multiplicity,
                check.multiplicity_witness
            )));
        }
    }
    debug_assert!(families.iter().all(|f| s_multiplicity(space, f, &s_ext).value <= 1));
    Ok(SplitCover {
        families,
        c_eff: c_eff.to_string(),
        bound: bound.to_string(),
        family_checks,
        covers,
    })
}

fn describe(check: &NagataCheck, scale: &str) -> String {
    let mut parts = Vec::new();
    if !check.covers {
        parts.push(format!("uncovered points {:?}", check.uncovered));
    }
    if !check.bounded {
        parts.push(format!("members over the diameter bound {:?}", check.oversized));
    }
    if check.multiplicity > check.max_multiplicity {
        parts.push(format!(
            "{scale}-multiplicity {} > {} (witness {:?})",
            check.multiplicity, check.max_multiplicity, check.multiplicity_witness
        ));
    }
    parts.join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspace::{line_space, parse_rational};

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn line(vals: &[&str]) -> FiniteQSpace {
        line_space(&vals.iter().map(|v| r(v)).collect::<Vec<_>>()).unwrap()
    }

    fn sets(space: &FiniteQSpace, fam: &[&[&str]]) -> Vec<PointSet> {
        fam.iter().map(|m| space.set_from_labels(m).unwrap()).collect()
    }

    #[test]
    fn n_zero_keeps_a_separated_cover() {
        let s = line(&["0", "1", "5", "6"]);
        let cover = sets(&s, &[&["0", "1"], &["5", "6"]]);
        let out = split_cover(&s, &cover, &r("1"), 0, &r("1")).unwrap();
        assert_eq!(out.families.len(), 1);
        assert_eq!(out.families[0], cover);
        assert_eq!(out.family_checks[0].multiplicity, 1);
    }

    #[test]
    fn sample_cover_splits() {
        // K = 2 on the line; with n = 1 and s = 1/8 the K^2 s-multiplicity
        // of {{0,1},{2},{4}} is 1 and the cover is 2-bounded with c = 4
        let s = line(&["0", "1", "2", "4"]);
        let cover = sets(&s, &[&["0", "1"], &["2"], &["4"]]);
        let out = split_cover(&s, &cover, &r("1/8"), 1, &r("4")).unwrap();
        assert_eq!(out.families.len(), 2);
        assert!(out.family_checks.iter().all(|c| c.bounded && c.multiplicity <= 1));
        assert!(out.covers);
        assert_eq!(out.bound, "8");
    }

    #[test]
    fn overlapping_cover_uses_higher_classes() {
        let s = line(&["0", "1", "2", "3", "4", "5"]);
        let cover = sets(&s, &[&["0", "1", "2"], &["2", "3", "4"], &["4", "5"]]);
        // K = 2, n = 1: K^2 s = 1/4 and pairs share points, multiplicity 2
        let out = split_cover(&s, &cover, &r("1/16"), 1, &r("32")).unwrap();
        assert_eq!(out.families[1].len(), 2);
        let shared: Vec<Vec<String>> = out.families[1].iter().map(|a| s.set_labels(a)).collect();
        assert_eq!(shared, vec![vec!["2"], vec!["4"]]);
        assert_eq!(s.set_labels(&out.families[0][0]), vec!["0", "1"]);
    }

    #[test]
    fn precondition_is_enforced() {
        let s = line(&["0", "1", "2", "4"]);
        let cover = sets(&s, &[&["0", "1"], &["1", "2"], &["2"], &["4"]]);
        // three members meet {1,2} while n + 1 = 2
        let err = split_cover(&s, &cover, &r("1/4"), 1, &r("8")).unwrap_err();
        assert!(matches!(err, NagataError::Precondition(ref m) if m.contains("multiplicity 3")), "{err}");
        let partial = sets(&s, &[&["0", "1"]]);
        assert!(matches!(split_cover(&s, &partial, &r("1"), 0, &r("1")), Err(NagataError::Precondition(_))));
        assert_eq!(split_cover(&s, &cover, &r("0"), 0, &r("1")).unwrap_err(), NagataError::NonPositiveScale);
    }
}
