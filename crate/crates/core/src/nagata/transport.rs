//! Transport of Nagata covers through an involution.
//!
//! Given a hierarchical covering `H` of `Z = X \ {∞, o}` for `d`, builds
//! `n+1` families covering `Z` that are `c″s`-bounded with
//! `s`-multiplicity at most one each for the involuted distance `d_o`.
//!
//! Points close to `o` in `d` (the set `A_s`) are covered by the largest
//! members of `H` around them that stay `c̃s`-bounded for `d_o`; the rest
//! (`B_s`) is `c′s`-bounded for `d_o` and becomes one set, absorbing the
//! colour-0 members within `d_o`-distance `s` of it.

use num_rational::BigRational;
use num_traits::{Pow, Signed};
use serde::Serialize;

use super::hierarchy::{verify_hierarchical, HierCovering};
use super::multiplicity::{verify_nagata_cover, NagataCheck};
use super::NagataError;
use crate::qspace::{ExtRational, FiniteQSpace, PointSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransportConstants {
    /// `max(K, K_o)`.
    pub k: String,
    pub k_space: String,
    pub k_involuted: String,
    pub c: String,
    pub r: String,
    pub n: usize,
    /// `10crK³`
    pub c_tilde: String,
    /// `2K³c̃²`
    pub c_prime: String,
    /// `K⁴c′`
    pub c_double_prime: String,
}

/// Exact values of the constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub k: BigRational,
    pub c_tilde: BigRational,
    pub c_prime: BigRational,
    pub c_double_prime: BigRational,
}

impl Constants {
    pub fn new(k: &BigRational, c: &BigRational, r: &BigRational) -> Self {
        let k3: BigRational = Pow::pow(k, 3u32);
        let c_tilde = BigRational::from_integer(10.into()) * c * r * &k3;
        let c_prime = BigRational::from_integer(2.into()) * &k3 * &c_tilde * &c_tilde;
        let c_double_prime = Pow::<u32>::pow(k, 4u32) * &c_prime;
        Self { k: k.clone(), c_tilde, c_prime, c_double_prime }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportBranch {
    /// `c′s >= K/a` or `diam_{d_o} Z <= c′s`: one set.
    SingleSet,
    General,
}

#[derive(Debug, Clone, Serialize)]
pub struct NagataTransport {
    pub constants: TransportConstants,
    pub branch: TransportBranch,
    /// `min d(x,o)` and `max d(x,o)` over `Z`.
    pub a: Option<String>,
    pub b: Option<String>,
    /// `d_o <= d/a²` and `d <= b² d_o` on `Z`.
    pub bi_lipschitz_holds: bool,
    pub a_s: Vec<String>,
    pub b_s: Vec<String>,
    /// `diam_{d_o} B_s`, strictly below `c′s`.
    pub b_s_diameter: Option<String>,
    /// Families `E_0..E_n` by label.
    pub families: Vec<Vec<Vec<String>>>,
    /// Per-family check under `d_o` with bound `c″s` and multiplicity 1.
    pub checks: Vec<NagataCheck>,
    pub covers: bool,
    #[serde(skip)]
    pub sets: Vec<Vec<PointSet>>,
    /// `Z` with the distance `d_o`; `sets` index into it.
    #[serde(skip)]
    pub involuted_domain: FiniteQSpace,
}

/// `Z = X \ {∞, o}` as a subspace of `space`, the domain of the
/// hierarchical covering passed to [`transport_cover_nagata`].
pub fn transport_domain(space: &FiniteQSpace, o: usize) -> Result<FiniteQSpace, NagataError> {
    Ok(space.restrict(&keep_set(space, o)?)?)
}

fn keep_set(space: &FiniteQSpace, o: usize) -> Result<PointSet, NagataError> {
    if o >= space.len() {
        return Err(crate::qspace::QSpaceError::IndexOutOfRange(o).into());
    }
    if !space.is_ordinary(o) {
        return Err(crate::qspace::QSpaceError::InfinityPoint(space.label(o).into()).into());
    }
    let mut keep = space.ordinary_set();
    keep.set(o, false);
    Ok(keep)
}

struct Candidate {
    k: usize,
    j: i32,
    first: usize,
    set: PointSet,
}

pub fn transport_cover_nagata(
    space: &FiniteQSpace,
    o: usize,
    h: &HierCovering,
    s: &BigRational,
) -> Result<NagataTransport, NagataError> {
    if !s.is_positive() {
        return Err(NagataError::NonPositiveScale);
    }
    let keep = keep_set(space, o)?;
    if keep.is_clear() {
        return Err(NagataError::Precondition("X \\ {∞, o} is empty".into()));
    }
    let z = space.restrict(&keep)?;
    let hier = verify_hierarchical(&z, h);
    if !hier.ok {
        let bad = hier.properties.iter().find(|p| !p.ok).expect("failed property");
        return Err(NagataError::Precondition(format!(
            "hierarchical covering fails {}: {}",
            bad.name,
            bad.witness.clone().unwrap_or_default()
        )));
    }
    let involuted = space.involute(o)?;
    let zo = involuted.restrict(&keep)?;
    let k_space = space.quasi_constant().clone();
    let k_inv = involuted.quasi_constant().clone();
    let k = if k_inv > k_space { k_inv.clone() } else { k_space.clone() };
    let consts = Constants::new(&k, &h.c, &h.r);
    let constants = TransportConstants {
        k: k.to_string(),
        k_space: k_space.to_string(),
        k_involuted: k_inv.to_string(),
        c: h.c.to_string(),
        r: h.r.to_string(),
        n: h.n,
        c_tilde: consts.c_tilde.to_string(),
        c_prime: consts.c_prime.to_string(),
        c_double_prime: consts.c_double_prime.to_string(),
    };
    let colours = h.n + 1;
    // z and zo index the same points; map to the original indices
    let orig: Vec<usize> = keep.ones().collect();
    let to_o: Vec<&BigRational> = orig.iter().map(|&x| space.fdist(x, o)).collect();

    let mut out = NagataTransport {
        constants,
        branch: TransportBranch::General,
        a: None,
        b: None,
        bi_lipschitz_holds: true,
        a_s: Vec::new(),
        b_s: Vec::new(),
        b_s_diameter: None,
        families: Vec::new(),
        checks: Vec::new(),
        covers: true,
        sets: vec![Vec::new(); colours],
        involuted_domain: zo.clone(),
    };
    let a = to_o.iter().min().map(|v| (*v).clone()).expect("nonempty");
    let b = to_o.iter().max().map(|v| (*v).clone()).expect("nonempty");
    let (a2, b2) = (&a * &a, &b * &b);
    for x in 0..z.len() {
        for y in x + 1..z.len() {
            let (d, d_o) = (z.fdist(x, y), zo.fdist(x, y));
            if d_o > &(d / &a2) || d > &(&b2 * d_o) {
                out.bi_lipschitz_holds = false;
            }
        }
    }
    out.a = Some(a.to_string());
    out.b = Some(b.to_string());

    let cs = &consts.c_prime * s;
    let diam_o = zo.finite_diameter();
    let k_over_a = &k / &a;
    if cs >= k_over_a || diam_o <= cs {
        if cs >= k_over_a && diam_o > k_over_a {
            return Err(NagataError::Postcondition(format!(
                "diam_o(Z) = {diam_o} exceeds K/a = {k_over_a}"
            )));
        }
        out.branch = TransportBranch::SingleSet;
        out.sets[0].push(zo.ordinary_set());
        return finish(out, &z, s, &consts);
    }

    let threshold = BigRational::from_integer(2.into()) * &k / (s * &consts.c_prime);
    let mut a_s = z.empty_set();
    for (x, dx) in to_o.iter().enumerate() {
        if *dx <= &threshold {
            a_s.insert(x);
        }
    }
    let mut b_s = zo.ordinary_set();
    b_s.difference_with(&a_s);
    let cs_ext = ExtRational::from(cs.clone());
    if !b_s.is_clear() {
        let d = zo.diameter(&b_s);
        if d >= cs_ext {
            return Err(NagataError::Postcondition(format!("diam_o(B_s) = {d} is not below c's = {cs}")));
        }
        out.b_s_diameter = Some(d.to_string());
    }

    let ct_ext = ExtRational::from(&consts.c_tilde * s);
    let mut candidates: Vec<Candidate> = Vec::new();
    for x in a_s.ones() {
        let mut found = None;
        for level in h.levels.iter().rev() {
            let ball = z.ball(x, &ExtRational::from(h.scale(level.j)));
            let hit = level.colors.iter().enumerate().find_map(|(k, fam)| {
                fam.iter().find(|c| ball.is_subset(c) && zo.diameter(c) <= ct_ext).map(|c| (k, c))
            });
            if let Some((k, c)) = hit {
                found = Some((k, level.j, c.clone()));
                break;
            }
        }
        match found {
            Some((_, j, _)) if j == h.j_max() => {
                return Err(NagataError::WindowTooSmall {
                    point: z.label(x).into(),
                    j_min: h.j_min(),
                    j_max: h.j_max(),
                })
            }
            None => {
                return Err(NagataError::WindowTooSmall {
                    point: z.label(x).into(),
                    j_min: h.j_min(),
                    j_max: h.j_max(),
                })
            }
            Some((k, j, set)) => candidates.push(Candidate { k, j, first: x, set }),
        }
    }
    out.a_s = z.set_labels(&a_s);
    out.b_s = z.set_labels(&b_s);

    // equal point sets: keep the smallest (k, j, first); then drop
    // members strictly inside another
    candidates.sort_by_key(|p| (p.k, p.j, p.first));
    let mut unique: Vec<Candidate> = Vec::new();
    for cand in candidates {
        if !unique.iter().any(|u| u.set == cand.set) {
            unique.push(cand);
        }
    }
    let maximal: Vec<&Candidate> = unique
        .iter()
        .filter(|c| !unique.iter().any(|d| d.set != c.set && c.set.is_subset(&d.set)))
        .collect();

    let s_ext = ExtRational::from(s.clone());
    let mut e = b_s.clone();
    for cand in maximal {
        if cand.k == 0 && !b_s.is_clear() && zo.set_distance(&cand.set, &b_s) <= s_ext {
            e.union_with(&cand.set);
        } else {
            out.sets[cand.k].push(cand.set.clone());
        }
    }
    if !e.is_clear() {
        out.sets[0].push(e);
    }
    finish(out, &z, s, &consts)
}

fn finish(
    mut out: NagataTransport,
    z: &FiniteQSpace,
    s: &BigRational,
    consts: &Constants,
) -> Result<NagataTransport, NagataError> {
    let zo = &out.involuted_domain;
    let s_ext = ExtRational::from(s.clone());
    let bound = ExtRational::from(&consts.c_double_prime * s);
    out.checks = out.sets.iter().map(|f| verify_nagata_cover(zo, f, &s_ext, &bound, 1)).collect();
    let mut union = zo.empty_set();
    for set in out.sets.iter().flatten() {
        union.union_with(set);
    }
    out.covers = zo.ordinary_set().is_subset(&union);
    out.families = out.sets.iter().map(|f| f.iter().map(|m| z.set_labels(m)).collect()).collect();
    if !out.covers {
        return Err(NagataError::Postcondition("transported families do not cover X \\ {∞, o}".into()));
    }
    for (k, check) in out.checks.iter().enumerate() {
        if !check.bounded || check.multiplicity > 1 {
            return Err(NagataError::Postcondition(format!(
                "family {k}: oversized {:?}, multiplicity {} (witness {:?})",
                check.oversized, check.multiplicity, check.multiplicity_witness
            )));
        }
    }
    Ok(out)
}

/// `c′s` below which the general branch applies, i.e. `min(K/a, diam_o Z)`
/// divided by `c′`, and the scale `2K/(c′ b)` above which `B_s` is
/// nonempty. Useful for choosing `s`.
pub fn general_branch_range(
    space: &FiniteQSpace,
    o: usize,
    h: &HierCovering,
) -> Result<Option<(BigRational, BigRational)>, NagataError> {
    let keep = keep_set(space, o)?;
    if keep.count_ones(..) < 2 {
        return Ok(None);
    }
    let involuted = space.involute(o)?;
    let zo = involuted.restrict(&keep)?;
    let k_space = space.quasi_constant().clone();
    let k_inv = involuted.quasi_constant().clone();
    let k = if k_inv > k_space { k_inv } else { k_space };
    let consts = Constants::new(&k, &h.c, &h.r);
    let dists: Vec<&BigRational> = keep.ones().map(|x| space.fdist(x, o)).collect();
    let a = (*dists.iter().min().expect("nonempty")).clone();
    let b = (*dists.iter().max().expect("nonempty")).clone();
    let k_over_a = &k / &a;
    let diam = zo.finite_diameter();
    let upper = if diam < k_over_a { diam } else { k_over_a } / &consts.c_prime;
    let lower = BigRational::from_integer(2.into()) * &k / (&consts.c_prime * &b);
    Ok((lower < upper).then_some((lower, upper)))
}

impl NagataTransport {
    pub fn ok(&self) -> bool {
        self.covers && self.checks.iter().all(|c| c.bounded && c.multiplicity <= 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nagata::build_hierarchical;
    use crate::qspace::{line_space, parse_rational};

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn grid(n: i64) -> FiniteQSpace {
        line_space(&(0..n).map(|i| BigRational::from_integer(i.into())).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn constants_for_k2_c1_r16() {
        let c = Constants::new(&r("2"), &r("1"), &r("16"));
        assert_eq!(c.c_tilde, r("1280"));
        assert_eq!(c.c_prime, r("2") * r("8") * r("1280") * r("1280"));
        assert_eq!(c.c_double_prime, r("16") * &c.c_prime);
    }

    #[test]
    fn bounded_case_gives_one_set() {
        let s = grid(6);
        let z = transport_domain(&s, 0).unwrap();
        let h = build_hierarchical(&z, &r("16"), 1, &r("64")).unwrap();
        let t = transport_cover_nagata(&s, 0, &h, &r("1")).unwrap();
        assert_eq!(t.branch, TransportBranch::SingleSet);
        assert_eq!(t.families[0], vec![vec!["1", "2", "3", "4", "5"]]);
        assert!(t.ok());
        assert!(t.bi_lipschitz_holds);
    }

    #[test]
    fn general_case_verifies() {
        let s = grid(24);
        let o = 0;
        let z = transport_domain(&s, o).unwrap();
        let h = build_hierarchical(&z, &r("16"), 1, &r("64")).unwrap();
        let (lo, hi) = general_branch_range(&s, o, &h).unwrap().expect("range");
        let mid = (&lo + &hi) / BigRational::from_integer(2.into());
        let t = transport_cover_nagata(&s, o, &h, &mid).unwrap();
        assert_eq!(t.branch, TransportBranch::General);
        assert!(!t.b_s.is_empty());
        assert!(t.ok(), "{:?}", t.checks);
    }

    #[test]
    fn point_at_infinity_is_rejected() {
        let s = grid(4).extend_with_infinity().unwrap();
        let z = transport_domain(&s, 1).unwrap();
        let h = build_hierarchical(&z, &r("16"), 1, &r("64")).unwrap();
        let inf = s.infinity().unwrap();
        assert!(transport_cover_nagata(&s, inf, &h, &r("1")).is_err());
        assert!(transport_cover_nagata(&s, 1, &h, &r("0")).is_err());
    }
}
