//! `s`-multiplicity of a family of point sets.
//!
//! A set `U` with `diam U <= s` meeting `m` members can be shrunk to one
//! point per met member without increasing its diameter, and a point set
//! has diameter at most `s` exactly when it is a clique of the threshold
//! graph `G_s` (edges `d(x,y) <= s`). The multiplicity is therefore the
//! largest number of members met by a maximal clique of `G_s`.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::qspace::{ExtRational, FiniteQSpace, PointSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiplicity {
    pub value: usize,
    /// One point per met member, of diameter at most `s`.
    pub witness: PointSet,
}

/// Adjacency rows of `G_s` restricted to `vertices`.
fn threshold_graph(space: &FiniteQSpace, vertices: &PointSet, s: &ExtRational) -> Vec<FixedBitSet> {
    let n = space.len();
    let mut adj = vec![FixedBitSet::with_capacity(n); n];
    let vs: Vec<usize> = vertices.ones().collect();
    for (a, &i) in vs.iter().enumerate() {
        for &j in &vs[a + 1..] {
            if space.dist(i, j) <= s {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    adj
}

/// Calls `f` on every maximal clique (Bron–Kerbosch with pivoting).
pub fn for_each_maximal_clique(adj: &[FixedBitSet], vertices: &PointSet, f: &mut impl FnMut(&FixedBitSet)) {
    let r = FixedBitSet::with_capacity(adj.len());
    bron_kerbosch(adj, r, vertices.clone(), FixedBitSet::with_capacity(adj.len()), f);
}

fn bron_kerbosch(
    adj: &[FixedBitSet],
    r: FixedBitSet,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    f: &mut impl FnMut(&FixedBitSet),
) {
    if p.is_clear() && x.is_clear() {
        f(&r);
        return;
    }
    let pivot = p
        .ones()
        .chain(x.ones())
        .max_by_key(|&u| adj[u].intersection(&p).count())
        .expect("p or x nonempty");
    let mut candidates = p.clone();
    candidates.difference_with(&adj[pivot]);
    for v in candidates.ones().collect::<Vec<_>>() {
        let mut r2 = r.clone();
        r2.insert(v);
        let mut p2 = p.clone();
        p2.intersect_with(&adj[v]);
        let mut x2 = x.clone();
        x2.intersect_with(&adj[v]);
        bron_kerbosch(adj, r2, p2, x2, f);
        p.set(v, false);
        x.insert(v);
    }
}

/// Members equal as point sets count once.
fn distinct_members(sets: &[PointSet]) -> Vec<&PointSet> {
    let mut out: Vec<&PointSet> = Vec::new();
    for s in sets {
        if !s.is_clear() && !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// The exact `s`-multiplicity of `sets` with a witness. Only ordinary
/// points are considered.
pub fn s_multiplicity(space: &FiniteQSpace, sets: &[PointSet], s: &ExtRational) -> Multiplicity {
    let members = distinct_members(sets);
    let mut vertices = space.empty_set();
    for m in &members {
        vertices.union_with(m);
    }
    if let Some(w) = space.infinity() {
        vertices.set(w, false);
    }
    let adj = threshold_graph(space, &vertices, s);
    let mut best = Multiplicity { value: 0, witness: space.empty_set() };
    for_each_maximal_clique(&adj, &vertices, &mut |clique| {
        let met: Vec<&&PointSet> = members.iter().filter(|m| !m.is_disjoint(clique)).collect();
        if met.len() > best.value {
            let mut witness = space.empty_set();
            for m in &met {
                let p = m.intersection(clique).next().expect("met member");
                witness.insert(p);
            }
            best = Multiplicity { value: met.len(), witness };
        }
    });
    best
}

/// Whether distinct members are more than `s` apart, i.e. whether the
/// `s`-multiplicity is at most one. Returns a violating pair of member
/// indices and points otherwise.
pub fn separated(space: &FiniteQSpace, sets: &[PointSet], s: &ExtRational) -> Result<(), (usize, usize, usize, usize)> {
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if sets[a] == sets[b] {
                continue;
            }
            for x in sets[a].ones() {
                for y in sets[b].ones() {
                    if space.is_ordinary(x) && space.is_ordinary(y) && space.dist(x, y) <= s {
                        return Err((a, b, x, y));
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NagataCheck {
    pub ok: bool,
    pub covers: bool,
    pub uncovered: Vec<String>,
    pub bounded: bool,
    /// Members whose diameter exceeds the bound, with their diameter.
    pub oversized: Vec<(usize, String)>,
    pub multiplicity: usize,
    pub multiplicity_witness: Vec<String>,
    pub max_multiplicity: usize,
}

/// Checks that `sets` covers the ordinary points, that every member has
/// diameter at most `bound`, and that the `s`-multiplicity is at most `m`.
pub fn verify_nagata_cover(
    space: &FiniteQSpace,
    sets: &[PointSet],
    s: &ExtRational,
    bound: &ExtRational,
    m: usize,
) -> NagataCheck {
    verify_nagata_cover_on(space, &space.ordinary_set(), sets, s, bound, m)
}

/// [`verify_nagata_cover`] with an explicit domain to be covered.
pub fn verify_nagata_cover_on(
    space: &FiniteQSpace,
    domain: &PointSet,
    sets: &[PointSet],
    s: &ExtRational,
    bound: &ExtRational,
    m: usize,
) -> NagataCheck {
    let mut union = space.empty_set();
    for set in sets {
        union.union_with(set);
    }
    let uncovered: Vec<String> = domain.difference(&union).map(|p| space.label(p).to_string()).collect();
    let oversized: Vec<(usize, String)> = sets
        .iter()
        .enumerate()
        .filter_map(|(i, set)| {
            let d = space.diameter(set);
            (&d > bound).then(|| (i, d.to_string()))
        })
        .collect();
    let mult = s_multiplicity(space, sets, s);
    let covers = uncovered.is_empty();
    let bounded = oversized.is_empty();
    NagataCheck {
        ok: covers && bounded && mult.value <= m,
        covers,
        uncovered,
        bounded,
        oversized,
        multiplicity: mult.value,
        multiplicity_witness: space.set_labels(&mult.witness),
        max_multiplicity: m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspace::{line_space, parse_rational};
    use num_rational::BigRational;

    fn line(vals: &[&str]) -> FiniteQSpace {
        line_space(&vals.iter().map(|v| parse_rational(v).unwrap()).collect::<Vec<BigRational>>()).unwrap()
    }

    fn sets(space: &FiniteQSpace, fam: &[&[&str]]) -> Vec<PointSet> {
        fam.iter().map(|m| space.set_from_labels(m).unwrap()).collect()
    }

    fn q(s: &str) -> ExtRational {
        s.parse().unwrap()
    }

    #[test]
    fn sample_family_has_multiplicity_two() {
        let s = line(&["0", "1", "2", "4"]);
        let fam = sets(&s, &[&["0", "1"], &["2"], &["4"]]);
        let m = s_multiplicity(&s, &fam, &q("1"));
        assert_eq!(m.value, 2);
        assert_eq!(s.set_labels(&m.witness), vec!["1", "2"]);
        let check = verify_nagata_cover(&s, &fam, &q("1"), &q("1"), 2);
        assert!(check.ok);
        let check = verify_nagata_cover(&s, &fam, &q("1"), &q("1"), 1);
        assert!(!check.ok);
        assert_eq!(check.multiplicity_witness, vec!["1", "2"]);
        assert!(separated(&s, &fam, &q("1")).is_err());
    }

    #[test]
    fn separated_singletons() {
        let s = line(&["0", "3", "7"]);
        let fam = sets(&s, &[&["0"], &["3"], &["7"]]);
        assert_eq!(s_multiplicity(&s, &fam, &q("2")).value, 1);
        assert!(separated(&s, &fam, &q("2")).is_ok());
        // large s: the whole space is a witness
        assert_eq!(s_multiplicity(&s, &fam, &q("10")).value, 3);
    }

    #[test]
    fn single_point_space() {
        let s = line(&["5"]);
        let fam = sets(&s, &[&["5"]]);
        assert!(verify_nagata_cover(&s, &fam, &q("1"), &q("0"), 1).ok);
    }

    #[test]
    fn uncovered_and_oversized_are_reported() {
        let s = line(&["0", "1", "2", "4"]);
        let fam = sets(&s, &[&["0", "2"], &["1"]]);
        let check = verify_nagata_cover(&s, &fam, &q("1/2"), &q("1"), 3);
        assert_eq!(check.uncovered, vec!["4"]);
        assert_eq!(check.oversized, vec![(0, "2".to_string())]);
    }

    #[test]
    fn cliques_of_a_path() {
        let s = line(&["0", "1", "2", "3"]);
        let adj = threshold_graph(&s, &s.ordinary_set(), &q("1"));
        let mut cliques = Vec::new();
        for_each_maximal_clique(&adj, &s.ordinary_set(), &mut |c| cliques.push(s.set_labels(c)));
        cliques.sort();
        assert_eq!(cliques, vec![vec!["0", "1"], vec!["1", "2"], vec!["2", "3"]]);
    }
}
