//! Hierarchical coverings: for every level `j` a cover `𝓑^j` of the
//! ordinary points split into colours `𝓑^j_0..𝓑^j_n` such that
//!
//! * (i) each `𝓑^j_k` is `cr^j`-bounded with `r^j`-multiplicity at most 1;
//! * (ii) every closed ball `B_{r^j}(x)` lies in some member of `𝓑^j`;
//! * (iii) for every colour `k` each bounded set lies in a member of
//!   `⋃_j 𝓑^j_k`;
//! * (iv) for `i < j`, `B ∈ 𝓑^i_k` and `C ∈ 𝓑^j_k`, either `B ⊂ C` or
//!   `d(x,y) > r^i` for all `x ∈ B`, `y ∈ C`.
//!
//! On a finite space only a window of levels carries information: below
//! the smallest distance the balls are singletons, above the diameter they
//! are everything.
//!
//! Construction per level: a disjoint cover carved from balls, split into
//! colours at scale `K⁴r^j`, colours rotated so a fixed base point lands in
//! colour `j mod (n+1)`, members enlarged by their `r^j`-balls. Then, per
//! colour, every `C` absorbs the lower-level members `B` with
//! `d(B,C) <= K²r^i` together with everything they absorbed, repeated
//! until nothing changes.

use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use super::multiplicity::{s_multiplicity, separated};
use super::split::split_cover;
use super::{dedup_sets, NagataError};
use crate::qspace::{ExtRational, FiniteQSpace, PointSet};

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub j: i32,
    /// `n+1` colour classes.
    pub colors: Vec<Vec<PointSet>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierCovering {
    pub r: BigRational,
    pub c: BigRational,
    pub n: usize,
    /// Consecutive levels `j_min..=j_max`.
    pub levels: Vec<Level>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelFile {
    pub j: i32,
    pub colors: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HierCoveringFile {
    pub r: String,
    pub c: String,
    pub n: usize,
    pub j_min: i32,
    pub j_max: i32,
    /// Smallest `c` for which (i)'s diameter bound holds.
    pub realized_c: String,
    pub levels: Vec<LevelFile>,
}

impl HierCovering {
    pub fn j_min(&self) -> i32 {
        self.levels.first().map_or(0, |l| l.j)
    }

    pub fn j_max(&self) -> i32 {
        self.levels.last().map_or(0, |l| l.j)
    }

    pub fn level(&self, j: i32) -> Option<&Level> {
        self.levels.iter().find(|l| l.j == j)
    }

    pub fn scale(&self, j: i32) -> BigRational {
        Pow::pow(&self.r, j)
    }

    /// `max diam(C) / r^j` over all members.
    pub fn realized_c(&self, space: &FiniteQSpace) -> BigRational {
        let mut best = BigRational::zero();
        for level in &self.levels {
            let rj = self.scale(level.j);
            for c in level.colors.iter().flatten() {
                if let Some(d) = space.diameter(c).into_finite() {
                    let q = d / &rj;
                    if q > best {
                        best = q;
                    }
                }
            }
        }
        best
    }

    pub fn to_file(&self, space: &FiniteQSpace) -> HierCoveringFile {
        HierCoveringFile {
            r: self.r.to_string(),
            c: self.c.to_string(),
            n: self.n,
            j_min: self.j_min(),
            j_max: self.j_max(),
            realized_c: self.realized_c(space).to_string(),
            levels: self
                .levels
                .iter()
                .map(|l| LevelFile {
                    j: l.j,
                    colors: l.colors.iter().map(|f| f.iter().map(|s| space.set_labels(s)).collect()).collect(),
                })
                .collect(),
        }
    }
}

/// Largest `j` with `r^j <= x`.
pub(crate) fn floor_log(r: &BigRational, x: &BigRational) -> i32 {
    let mut j = 0i32;
    let mut p = BigRational::one();
    if &p <= x {
        loop {
            let next = &p * r;
            if &next > x {
                return j;
            }
            p = next;
            j += 1;
        }
    }
    while &p > x {
        p /= r;
        j -= 1;
    }
    j
}

/// Smallest `j` with `r^j >= x`.
pub(crate) fn ceil_log(r: &BigRational, x: &BigRational) -> i32 {
    let j = floor_log(r, x);
    if &Pow::<i32>::pow(r, j) == x {
        j
    } else {
        j + 1
    }
}

/// The level window `[⌊log_r(m/K^{2n+4})⌋ - 1, ⌈log_r D⌉ + n + 1]` for
/// the smallest positive distance `m` and the diameter `D`; `[0, n]` for a
/// point. At the bottom level every member is a singleton, and the top
/// `n+1` levels give each colour a member containing everything.
pub fn level_window(space: &FiniteQSpace, r: &BigRational, n: usize) -> (i32, i32) {
    match space.min_positive_distance() {
        None => (0, n as i32),
        Some(m) => {
            let d = space.finite_diameter();
            let k: BigRational = Pow::pow(space.quasi_constant(), 2 * n as u32 + 4);
            (floor_log(r, &(m / k)) - 1, ceil_log(r, &d) + n as i32 + 1)
        }
    }
}

fn next_power_of_two(r: &BigRational) -> BigRational {
    let two = BigRational::from_integer(2.into());
    let mut p = BigRational::one();
    while &p <= r {
        p *= &two;
    }
    p
}

/// Neighbourhood rows: `rows[x] = B_ρ(x) ∩ domain`.
fn ball_rows(space: &FiniteQSpace, domain: &PointSet, rho: &BigRational) -> Vec<PointSet> {
    let rho = ExtRational::from(rho.clone());
    (0..space.len())
        .map(|x| {
            let mut b = space.ball(x, &rho);
            b.intersect_with(domain);
            b
        })
        .collect()
}

fn grow(set: &PointSet, rows: &[PointSet]) -> PointSet {
    let mut out = set.clone();
    for x in set.ones() {
        out.union_with(&rows[x]);
    }
    out
}

/// A disjoint cover by carved balls of radius `t 2^m`, with the smallest
/// `m` for which its `t`-multiplicity is at most `n+1`.
fn carved_cover(space: &FiniteQSpace, domain: &PointSet, t: &BigRational, n: usize) -> Vec<PointSet> {
    let two = BigRational::from_integer(2.into());
    let mut rho = t.clone();
    let t_ext = ExtRational::from(t.clone());
    loop {
        let rows = ball_rows(space, domain, &rho);
        let mut left = domain.clone();
        let mut pieces = Vec::new();
        for x in domain.ones() {
            if !left.contains(x) {
                continue;
            }
            let mut piece = rows[x].clone();
            piece.intersect_with(&left);
            left.difference_with(&piece);
            pieces.push(piece);
        }
        if pieces.len() == 1 || s_multiplicity(space, &pieces, &t_ext).value <= n + 1 {
            return pieces;
        }
        rho *= &two;
    }
}

/// Builds a hierarchical covering of the ordinary points of `space` on
/// the window of [`level_window`] and verifies it.
pub fn build_hierarchical(
    space: &FiniteQSpace,
    r: &BigRational,
    n: usize,
    c: &BigRational,
) -> Result<HierCovering, NagataError> {
    if r <= &BigRational::one() {
        return Err(NagataError::BadBase);
    }
    let domain = space.ordinary_set();
    let z = domain.ones().next().ok_or(NagataError::Precondition("no ordinary points".into()))?;
    let k = space.quasi_constant().clone();
    let k2n: BigRational = Pow::pow(&k, 2 * n as u32);
    let k4: BigRational = Pow::pow(&k, 4u32);
    let (j_min, j_max) = level_window(space, r, n);
    let colours = n + 1;

    let mut levels = Vec::new();
    for j in j_min..=j_max {
        let rj: BigRational = Pow::pow(r, j);
        let s = &k4 * &rj;
        let t = &k2n * &s;
        let base = carved_cover(space, &domain, &t, n);
        let mut c_base = BigRational::one();
        for piece in &base {
            if let Some(d) = space.diameter(piece).into_finite() {
                let q = d / &t;
                if q > c_base {
                    c_base = q;
                }
            }
        }
        let split = split_cover(space, &base, &s, n, &c_base)?;
        let target = j.rem_euclid(colours as i32) as usize;
        let with_z = split.families.iter().position(|f| f.iter().any(|m| m.contains(z))).expect("cover");
        let mut order: Vec<usize> = (0..colours).filter(|&f| f != with_z).collect();
        order.insert(target, with_z);
        let rows = ball_rows(space, &domain, &rj);
        let colors = order
            .iter()
            .map(|&f| dedup_sets(split.families[f].iter().map(|m| grow(m, &rows)).collect()))
            .collect();
        levels.push(Level { j, colors });
    }

    // per-level neighbourhood rows of radius K² r^i for the chain relation
    let k2 = &k * &k;
    let near: Vec<Vec<PointSet>> = levels
        .iter()
        .map(|l| ball_rows(space, &domain, &(&k2 * Pow::<i32>::pow(r, l.j))))
        .collect();
    for _ in 0..=levels.len() + 1 {
        let merged = merge_chains(&levels, &near, colours);
        if merged == levels {
            break;
        }
        levels = merged;
    }

    let h = HierCovering { r: r.clone(), c: c.clone(), n, levels };
    let report = verify_hierarchical(space, &h);
    if let Some(bad) = report.properties.iter().find(|p| !p.ok) {
        return Err(NagataError::IncreaseBase {
            property: bad.name.clone(),
            detail: bad.witness.clone().unwrap_or_default(),
            suggested_r: next_power_of_two(r).to_string(),
        });
    }
    Ok(h)
}

/// One round of chain merging: `C` absorbs the merged version of every
/// lower-level same-colour `B` with `d(B,C) <= K²r^i`.
fn merge_chains(levels: &[Level], near: &[Vec<PointSet>], colours: usize) -> Vec<Level> {
    let mut out: Vec<Level> = Vec::with_capacity(levels.len());
    for (jdx, level) in levels.iter().enumerate() {
        let mut colors = Vec::with_capacity(colours);
        for k in 0..colours {
            let merged: Vec<PointSet> = level.colors[k]
                .iter()
                .map(|c| {
                    let mut hat = c.clone();
                    for idx in 0..jdx {
                        let reach = grow(c, &near[idx]);
                        for (b, b_hat) in levels[idx].colors[k].iter().zip(&out[idx].colors[k]) {
                            if !b.is_disjoint(&reach) {
                                hat.union_with(b_hat);
                            }
                        }
                    }
                    hat
                })
                .collect();
            colors.push(merged);
        }
        out.push(Level { j: level.j, colors });
    }
    for level in &mut out {
        for fam in &mut level.colors {
            *fam = dedup_sets(std::mem::take(fam));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub ok: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HierReport {
    pub ok: bool,
    pub j_min: i32,
    pub j_max: i32,
    pub properties: Vec<PropertyCheck>,
}

fn check(name: &str) -> PropertyCheck {
    PropertyCheck { name: name.into(), ok: true, checked: 0, witness: None }
}

fn fail(p: &mut PropertyCheck, witness: String) {
    if p.ok {
        p.ok = false;
        p.witness = Some(witness);
    }
}

/// Checks properties (i)–(iv) literally over the levels of `h`. For (iii)
/// the only bounded set that matters is the whole domain.
pub fn verify_hierarchical(space: &FiniteQSpace, h: &HierCovering) -> HierReport {
    let domain = space.ordinary_set();
    let mut p1 = check("bounded-separated");
    let mut p2 = check("ball-containment");
    let mut p3 = check("colour-exhaustion");
    let mut p4 = check("nesting");
    let label_set = |s: &PointSet| format!("{:?}", space.set_labels(s));

    let rows: Vec<Vec<PointSet>> = h.levels.iter().map(|l| ball_rows(space, &domain, &h.scale(l.j))).collect();
    for (idx, level) in h.levels.iter().enumerate() {
        let rj = h.scale(level.j);
        let bound = ExtRational::from(&h.c * &rj);
        let rj_ext = ExtRational::from(rj.clone());
        for (k, fam) in level.colors.iter().enumerate() {
            for set in fam {
                p1.checked += 1;
                let d = space.diameter(set);
                if d > bound {
                    fail(&mut p1, format!("level {}, colour {k}: {} has diameter {d} > {bound}", level.j, label_set(set)));
                }
            }
            if let Err((a, b, x, y)) = separated(space, fam, &rj_ext) {
                fail(
                    &mut p1,
                    format!(
                        "level {}, colour {k}: members {a} and {b} meet the {}-set {{{}, {}}}",
                        level.j,
                        rj,
                        space.label(x),
                        space.label(y)
                    ),
                );
            }
        }
        for x in domain.ones() {
            p2.checked += 1;
            let ball = &rows[idx][x];
            if !level.colors.iter().flatten().any(|c| ball.is_subset(c)) {
                fail(&mut p2, format!("level {}: no member contains the ball around {}", level.j, space.label(x)));
            }
        }
    }
    for k in 0..=h.n {
        p3.checked += 1;
        let found = h.levels.iter().any(|l| l.colors.get(k).is_some_and(|f| f.iter().any(|c| domain.is_subset(c))));
        if !found {
            fail(&mut p3, format!("colour {k} has no member containing the whole space"));
        }
    }
    for (idx_i, lower) in h.levels.iter().enumerate() {
        for upper in &h.levels[idx_i + 1..] {
            for k in 0..=h.n {
                let (Some(bs), Some(cs)) = (lower.colors.get(k), upper.colors.get(k)) else { continue };
                for b in bs {
                    let reach = grow(b, &rows[idx_i]);
                    for c in cs {
                        p4.checked += 1;
                        if b.is_subset(c) || reach.is_disjoint(c) {
                            continue;
                        }
                        let (x, y) = b
                            .ones()
                            .find_map(|x| rows[idx_i][x].intersection(c).next().map(|y| (x, y)))
                            .expect("reach meets c");
                        fail(
                            &mut p4,
                            format!(
                                "B = {} (level {}), C = {} (level {}), colour {k}: x = {}, y = {}, i = {}",
                                label_set(b),
                                lower.j,
                                label_set(c),
                                upper.j,
                                space.label(x),
                                space.label(y),
                                lower.j
                            ),
                        );
                    }
                }
            }
        }
    }
    let properties = vec![p1, p2, p3, p4];
    HierReport { ok: properties.iter().all(|p| p.ok), j_min: h.j_min(), j_max: h.j_max(), properties }
}
