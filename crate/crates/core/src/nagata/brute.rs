//! Exhaustive minimum multiplicity over bounded covers of tiny spaces.
//!
//! Every `cs`-bounded cover can be refined to a partition into
//! `cs`-bounded blocks without raising its `s`-multiplicity (assign each
//! point to one member containing it; blocks sit in distinct members). So
//! the minimum over covers equals the minimum over partitions, which are
//! enumerated as restricted growth strings.

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use super::multiplicity::s_multiplicity;
use super::NagataError;
use crate::qspace::{ExtRational, FiniteQSpace, PointSet};

pub const MAX_BRUTE_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BruteForce {
    /// Minimal `m` such that a `cs`-bounded cover with `s`-multiplicity
    /// at most `m` exists.
    pub m: usize,
    /// A cover attaining `m`, by labels.
    pub cover: Vec<Vec<String>>,
    pub partitions_checked: usize,
}

pub fn nagata_bruteforce(space: &FiniteQSpace, s: &BigRational, c: &BigRational) -> Result<BruteForce, NagataError> {
    if s.is_negative() || c.is_negative() {
        return Err(NagataError::NonPositiveScale);
    }
    let pts: Vec<usize> = space.ordinary().collect();
    if pts.len() > MAX_BRUTE_POINTS {
        return Err(NagataError::TooLarge { got: pts.len(), max: MAX_BRUTE_POINTS });
    }
    let s_ext = ExtRational::from(s.clone());
    let bound = ExtRational::from(c * s);
    let mut best: Option<(usize, Vec<PointSet>)> = None;
    let mut checked = 0;
    let mut blocks: Vec<PointSet> = Vec::new();
    recurse(space, &pts, 0, &mut blocks, &bound, &mut |blocks| {
        checked += 1;
        let m = s_multiplicity(space, blocks, &s_ext).value;
        if best.as_ref().is_none_or(|(b, _)| m < *b) {
            best = Some((m, blocks.to_vec()));
        }
    });
    let (m, cover) = best.unwrap_or((0, Vec::new()));
    Ok(BruteForce {
        m,
        cover: cover.iter().map(|b| space.set_labels(b)).collect(),
        partitions_checked: checked,
    })
}

/// Places `pts[i..]` into existing blocks or a new one, pruning blocks
/// whose diameter exceeds `bound`.
fn recurse(
    space: &FiniteQSpace,
    pts: &[usize],
    i: usize,
    blocks: &mut Vec<PointSet>,
    bound: &ExtRational,
    visit: &mut impl FnMut(&[PointSet]),
) {
    if i == pts.len() {
        visit(blocks);
        return;
    }
    let p = pts[i];
    for b in 0..=blocks.len() {
        if b == blocks.len() {
            let mut set = space.empty_set();
            set.insert(p);
            blocks.push(set);
            recurse(space, pts, i + 1, blocks, bound, visit);
            blocks.pop();
        } else if blocks[b].ones().all(|q| space.dist(p, q) <= bound) {
            blocks[b].insert(p);
            recurse(space, pts, i + 1, blocks, bound, visit);
            blocks[b].set(p, false);
        }
    }
}
