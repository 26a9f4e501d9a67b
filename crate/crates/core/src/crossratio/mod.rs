//! Cross-ratio triples of admissible quadruples.
//!
//! For a quadruple `(w,x,y,z)` the cross-ratio triple is
//! `(d(w,x)d(y,z) : d(w,y)d(z,x) : d(w,z)d(x,y))` in the real projective
//! plane. A point at infinity occurring once drops the factors that contain
//! it. A repeated point yields the boundary triple with a zero in the
//! component whose pair-partition joins the two repeated positions.
//!
//! All values are exact. [`LogTriple`] is a floating point view used for
//! reporting.

mod axioms;
mod perm;

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::qspace::{ExtRational, FiniteQSpace, QSpaceError};

pub use axioms::{
    check_axioms, condition4, AxiomReport, Cond4Outcome, ConditionResult, CONDITION_NAMES,
};
pub use perm::{partition_of, phi, verify_phi_table, PhiTableReport, S3Perm, S4Perm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrossRatioError {
    #[error("quadruple ({0}) is not admissible: a point appears more than twice")]
    Inadmissible(String),
    #[error("point index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("triple {0} has two zero entries and lies outside the closed simplex")]
    TwoZeros(String),
    #[error("triple has a negative entry")]
    Negative,
    #[error("triple has no non-zero entry")]
    AllZero,
    #[error("log triple {0:?} is neither in L4 nor one of its three boundary points")]
    NotInClosure([f64; 3]),
    #[error("label map is not a bijection: {0}")]
    NotBijection(String),
    #[error(transparent)]
    Space(#[from] QSpaceError),
}

/// A point `(a:b:c)` of the real projective plane with non-negative
/// integer coordinates. Equality is projective.
#[derive(Debug, Clone)]
pub struct ProjTriple([BigInt; 3]);

impl ProjTriple {
    pub fn new(coords: [BigInt; 3]) -> Result<Self, CrossRatioError> {
        if coords.iter().any(Signed::is_negative) {
            return Err(CrossRatioError::Negative);
        }
        if coords.iter().all(Zero::is_zero) {
            return Err(CrossRatioError::AllZero);
        }
        Ok(ProjTriple(coords))
    }

    pub fn from_ints(a: u64, b: u64, c: u64) -> Result<Self, CrossRatioError> {
        Self::new([a.into(), b.into(), c.into()])
    }

    /// Clears denominators.
    pub fn from_rationals(r: &[BigRational; 3]) -> Result<Self, CrossRatioError> {
        let l = r.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        Self::new([0, 1, 2].map(|i| r[i].numer() * (&l / r[i].denom())))
    }

    pub(crate) fn from_raw(coords: [BigInt; 3]) -> Self {
        ProjTriple(coords)
    }

    /// The three boundary points of the closed simplex: a zero at `t`,
    /// ones elsewhere.
    pub fn boundary(t: usize) -> Self {
        let mut c = [BigInt::one(), BigInt::one(), BigInt::one()];
        c[t] = BigInt::zero();
        ProjTriple(c)
    }

    pub fn coords(&self) -> &[BigInt; 3] {
        &self.0
    }

    /// Coordinates divided by their gcd.
    pub fn reduced(&self) -> [BigInt; 3] {
        let g = self.0[0].gcd(&self.0[1]).gcd(&self.0[2]);
        self.0.clone().map(|v| v / &g)
    }

    pub fn zero_count(&self) -> usize {
        self.0.iter().filter(|v| v.is_zero()).count()
    }

    /// Whether the triple lies in the closed simplex: all positive, or one
    /// zero and two positive entries.
    pub fn in_closed_simplex(&self) -> bool {
        self.zero_count() <= 1
    }

    /// Component `t` moved to position `sigma(t)`.
    pub fn permuted(&self, sigma: &S3Perm) -> Self {
        ProjTriple(sigma.act(&self.0))
    }

    /// `(ln(b/c), ln(c/a), ln(a/b))`, with the boundary points sent to
    /// `(∞,-∞,0)`, `(-∞,0,∞)` and `(0,∞,-∞)` by the position of the zero.
    pub fn to_log(&self) -> Result<LogTriple, CrossRatioError> {
        let inf = f64::INFINITY;
        match self.zero_count() {
            0 => {
                let l = self.0.clone().map(|v| ln_bigint(&v));
                Ok(LogTriple([l[1] - l[2], l[2] - l[0], l[0] - l[1]]))
            }
            1 => {
                let t = self.0.iter().position(Zero::is_zero).expect("one zero");
                Ok(LogTriple(match t {
                    2 => [inf, -inf, 0.0],
                    1 => [-inf, 0.0, inf],
                    _ => [0.0, inf, -inf],
                }))
            }
            _ => Err(CrossRatioError::TwoZeros(self.to_string())),
        }
    }

    /// Largest coordinate difference after normalizing both triples to
    /// unit sum.
    pub fn proj_distance(&self, other: &ProjTriple) -> f64 {
        let norm = |t: &ProjTriple| {
            let s: BigInt = t.0.iter().sum();
            t.0.clone().map(|v| BigRational::new(v, s.clone()).to_f64().unwrap_or(f64::NAN))
        };
        let (a, b) = (norm(self), norm(other));
        (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }
}

impl PartialEq for ProjTriple {
    fn eq(&self, other: &Self) -> bool {
        let (p, q) = (&self.0, &other.0);
        &p[0] * &q[1] == &q[0] * &p[1]
            && &p[1] * &q[2] == &q[1] * &p[2]
            && &p[0] * &q[2] == &q[0] * &p[2]
    }
}

impl Eq for ProjTriple {}

impl fmt::Display for ProjTriple {
    /// Lowest terms, `p:q:r`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.reduced();
        write!(f, "{a}:{b}:{c}")
    }
}

impl Serialize for ProjTriple {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn ln_bigint(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits < 1000 {
        v.to_f64().expect("finite conversion").ln()
    } else {
        let shift = bits - 64;
        (v >> shift).to_f64().expect("finite conversion").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// A point of `L4 = {m1+m2+m3 = 0}` or one of its three boundary points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogTriple(pub [f64; 3]);

impl LogTriple {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `sign * sigma · self`.
    pub fn signed_permuted(&self, sign: i8, sigma: &S3Perm) -> LogTriple {
        LogTriple(sigma.act(&self.0).map(|v| if sign < 0 { -v } else { v }))
    }

    /// Componentwise agreement: equal infinities, finite parts within `tol`.
    pub fn close_to(&self, other: &LogTriple, tol: f64) -> bool {
        (0..3).all(|i| {
            let (a, b) = (self.0[i], other.0[i]);
            if a.is_finite() && b.is_finite() {
                (a - b).abs() <= tol
            } else {
                a == b
            }
        })
    }

    /// Inverse of [`ProjTriple::to_log`]. Finite triples give
    /// `(e^{-m2} : e^{m1} : 1)` with the exponentials converted exactly from
    /// their floating point values.
    pub fn from_log(&self) -> Result<ProjTriple, CrossRatioError> {
        let inf = f64::INFINITY;
        let m = self.0;
        if self.is_finite() {
            let coords = [(-m[1]).exp(), m[0].exp(), 1.0];
            let r = coords.map(|v| BigRational::from_f64(v).ok_or(CrossRatioError::NotInClosure(m)));
            let [a, b, c] = r;
            return ProjTriple::from_rationals(&[a?, b?, c?]);
        }
        let boundary = [[0.0, inf, -inf], [-inf, 0.0, inf], [inf, -inf, 0.0]];
        match boundary.iter().position(|b| *b == m) {
            Some(t) => Ok(ProjTriple::boundary(t)),
            None => Err(CrossRatioError::NotInClosure(m)),
        }
    }
}

/// Positions of the two pair-partitions, indexed by component.
const PAIRS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];

/// Whether no point occurs more than twice.
pub fn is_admissible(q: &[usize; 4]) -> bool {
    q.iter().all(|p| q.iter().filter(|&r| r == p).count() <= 2)
}

pub fn is_degenerate(q: &[usize; 4]) -> bool {
    (0..4).any(|i| (i + 1..4).any(|j| q[i] == q[j]))
}

fn quad_labels(space: &FiniteQSpace, q: &[usize; 4]) -> String {
    q.iter().map(|&i| space.label(i)).collect::<Vec<_>>().join(", ")
}

/// The cross-ratio triple of an admissible quadruple of point indices.
pub fn crt(space: &FiniteQSpace, q: [usize; 4]) -> Result<ProjTriple, CrossRatioError> {
    if let Some(&bad) = q.iter().find(|&&i| i >= space.len()) {
        return Err(CrossRatioError::IndexOutOfRange(bad));
    }
    if !is_admissible(&q) {
        return Err(CrossRatioError::Inadmissible(quad_labels(space, &q)));
    }
    Ok(crt_unchecked(space, &q))
}

/// Same as [`crt`] with points given by label.
pub fn crt_labels<S: AsRef<str>>(space: &FiniteQSpace, q: &[S; 4]) -> Result<ProjTriple, CrossRatioError> {
    let mut idx = [0; 4];
    for (slot, l) in idx.iter_mut().zip(q) {
        *slot = space.index_of(l.as_ref())?;
    }
    crt(space, idx)
}

pub(crate) fn crt_unchecked(space: &FiniteQSpace, q: &[usize; 4]) -> ProjTriple {
    for i in 0..4 {
        for j in i + 1..4 {
            if q[i] == q[j] {
                return ProjTriple::boundary(partition_of(i, j));
            }
        }
    }
    let ints = space.int_distances();
    let n = space.len();
    let inf_pos = space.infinity().and_then(|w| q.iter().position(|&p| p == w));
    let d = |a: usize, b: usize| ints.vals[q[a] * n + q[b]].as_ref().expect("finite pair");
    let comps = PAIRS.map(|pairs| {
        let mut it = pairs.iter().filter(|(a, b)| Some(*a) != inf_pos && Some(*b) != inf_pos);
        let (a, b) = *it.next().expect("one pair avoids the infinite point");
        match it.next() {
            Some(&(c, e)) => d(a, b) * d(c, e),
            None => d(a, b).clone(),
        }
    });
    ProjTriple::from_raw(comps)
}

/// Calls `f` on every admissible quadruple of `0..n`.
pub fn for_each_admissible(n: usize, mut f: impl FnMut([usize; 4])) {
    for w in 0..n {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let q = [w, x, y, z];
                    if is_admissible(&q) {
                        f(q);
                    }
                }
            }
        }
    }
}

/// Number of admissible quadruples on `n` points.
pub fn admissible_count(n: usize) -> usize {
    // all n^4 minus those with a point three or four times
    let n4 = n.pow(4);
    let quadruple = n;
    let triple = if n >= 2 { 4 * n * (n - 1) } else { 0 };
    n4 - quadruple - triple
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerMargin {
    /// `min over 4-subsets of mid/max` of the sorted crt components;
    /// `INF` when there is no quadruple of distinct points.
    pub margin: ExtRational,
    pub witness: Option<Vec<String>>,
    pub quadruples: u64,
}

/// Distance of the cross-ratio image from the three corners of the
/// simplex. Only sets of four distinct points matter: permuting a
/// quadruple permutes the components, and degenerate quadruples sit on the
/// boundary midpoints where the margin is 1.
pub fn corner_margin(space: &FiniteQSpace) -> CornerMargin {
    let n = space.len();
    let ints = space.int_distances();
    let inf = space.infinity();
    // best as (mid, max, witness) per first index, reduced in parallel
    let per_first = |i: usize| -> Option<(BigInt, BigInt, [usize; 4], u64)> {
        let mut best: Option<(BigInt, BigInt, [usize; 4])> = None;
        let mut count = 0u64;
        let mut small_best: Option<(i128, i128, [usize; 4])> = None;
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let q = [i, j, k, l];
                    count += 1;
                    if let Some(small) = &ints.small {
                        let d = |a: usize, b: usize| small[q[a] * n + q[b]] as i128;
                        let inf_pos = inf.and_then(|w| q.iter().position(|&p| p == w));
                        let mut c = [0i128; 3];
                        for (t, pairs) in PAIRS.iter().enumerate() {
                            c[t] = pairs
                                .iter()
                                .filter(|(a, b)| Some(*a) != inf_pos && Some(*b) != inf_pos)
                                .map(|&(a, b)| d(a, b))
                                .product();
                        }
                        c.sort_unstable();
                        let (mid, max) = (c[1], c[2]);
                        if small_best.is_none_or(|(bm, bx, _)| mid * bx < bm * max) {
                            small_best = Some((mid, max, q));
                        }
                    } else {
                        let t = crt_unchecked(space, &q);
                        let mut c = t.coords().clone();
                        c.sort();
                        let [_, mid, max] = c;
                        if best.as_ref().is_none_or(|(bm, bx, _)| &mid * bx < bm * &max) {
                            best = Some((mid, max, q));
                        }
                    }
                }
            }
        }
        if let Some((m, x, q)) = small_best {
            best = Some((BigInt::from(m), BigInt::from(x), q));
        }
        best.map(|(m, x, q)| (m, x, q, count))
    };
    let results: Vec<_> = (0..n).into_par_iter().filter_map(per_first).collect();
    let mut quadruples = 0;
    let mut best: Option<(BigInt, BigInt, [usize; 4])> = None;
    for (m, x, q, c) in results {
        quadruples += c;
        if best.as_ref().is_none_or(|(bm, bx, _)| &m * bx < bm * &x) {
            best = Some((m, x, q));
        }
    }
    match best {
        None => CornerMargin { margin: ExtRational::INF, witness: None, quadruples },
        Some((m, x, q)) => CornerMargin {
            margin: ExtRational::from(BigRational::new(m, x)),
            witness: Some(q.iter().map(|&i| space.label(i).to_string()).collect()),
            quadruples,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub quadruple: Vec<String>,
    pub left: ProjTriple,
    pub right: ProjTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub quadruples_checked: u64,
    pub first_mismatch: Option<Mismatch>,
}

/// Checks `crt_A(q) = crt_B(f(q))` on every admissible quadruple, where
/// `f` maps labels of `a` bijectively onto labels of `b`.
pub fn moebius_equivalence(
    a: &FiniteQSpace,
    b: &FiniteQSpace,
    f: &HashMap<String, String>,
) -> Result<EquivalenceReport, CrossRatioError> {
    if a.len() != b.len() || f.len() != a.len() {
        return Err(CrossRatioError::NotBijection(format!(
            "{} points, {} points, {} map entries",
            a.len(),
            b.len(),
            f.len()
        )));
    }
    let mut image = vec![0; a.len()];
    let mut seen = HashSet::new();
    for (i, slot) in image.iter_mut().enumerate() {
        let from = a.label(i);
        let to = f
            .get(from)
            .ok_or_else(|| CrossRatioError::NotBijection(format!("`{from}` is not mapped")))?;
        let j = b
            .index_of(to)
            .map_err(|_| CrossRatioError::NotBijection(format!("`{to}` is not a point of the target")))?;
        if !seen.insert(j) {
            return Err(CrossRatioError::NotBijection(format!("`{to}` is hit twice")));
        }
        *slot = j;
    }
    let n = a.len();
    let scan = |w: usize| -> (u64, Option<[usize; 4]>) {
        let mut count = 0;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let q = [w, x, y, z];
                    if !is_admissible(&q) {
                        continue;
                    }
                    count += 1;
                    if crt_unchecked(a, &q) != crt_unchecked(b, &q.map(|i| image[i])) {
                        return (count, Some(q));
                    }
                }
            }
        }
        (count, None)
    };
    let results: Vec<_> = (0..n).into_par_iter().map(scan).collect();
    let quadruples_checked = results.iter().map(|r| r.0).sum();
    let first_mismatch = results.iter().find_map(|r| r.1).map(|q| Mismatch {
        quadruple: q.iter().map(|&i| a.label(i).to_string()).collect(),
        left: crt_unchecked(a, &q),
        right: crt_unchecked(b, &q.map(|i| image[i])),
    });
    Ok(EquivalenceReport {
        equivalent: first_mismatch.is_none(),
        quadruples_checked,
        first_mismatch,
    })
}

/// [`moebius_equivalence`] reduced to its verdict.
pub fn moebius_equivalent(
    a: &FiniteQSpace,
    b: &FiniteQSpace,
    f: &HashMap<String, String>,
) -> Result<bool, CrossRatioError> {
    Ok(moebius_equivalence(a, b, f)?.equivalent)
}

/// The identity label map of a space.
pub fn identity_map(space: &FiniteQSpace) -> HashMap<String, String> {
    space.labels().iter().map(|l| (l.clone(), l.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspace::{line_space, parse_rational};

    fn line(vals: &[i64]) -> FiniteQSpace {
        line_space(&vals.iter().map(|&v| BigRational::from_integer(v.into())).collect::<Vec<_>>())
            .unwrap()
    }

    fn t(a: u64, b: u64, c: u64) -> ProjTriple {
        ProjTriple::from_ints(a, b, c).unwrap()
    }

    #[test]
    fn crt_of_line_sample() {
        let s = line(&[0, 1, 2, 4]);
        let c = crt(&s, [0, 1, 2, 3]).unwrap();
        assert_eq!(c, t(1, 3, 2));
        assert_eq!(c.to_string(), "1:3:2");
        assert_eq!(crt(&s, [1, 0, 2, 3]).unwrap(), t(1, 2, 3));
    }

    #[test]
    fn projective_equality_and_display() {
        assert_eq!(t(2, 6, 4), t(1, 3, 2));
        assert_ne!(t(2, 6, 4), t(1, 3, 3));
        assert_eq!(t(0, 4, 4).to_string(), "0:1:1");
        assert!(ProjTriple::from_ints(0, 0, 0).is_err());
        let r = [parse_rational("1/2").unwrap(), parse_rational("3/2").unwrap(), BigRational::one()];
        assert_eq!(ProjTriple::from_rationals(&r).unwrap(), t(1, 3, 2));
    }

    #[test]
    fn degenerate_and_infinite_quadruples() {
        let s = line(&[0, 1, 2, 4]).extend_with_infinity().unwrap();
        let w = s.infinity().unwrap();
        assert_eq!(crt(&s, [w, w, 1, 2]).unwrap(), t(0, 1, 1));
        assert_eq!(crt(&s, [0, 0, 1, 2]).unwrap(), t(0, 1, 1));
        assert_eq!(crt(&s, [w, 1, w, 2]).unwrap(), t(1, 0, 1));
        assert_eq!(crt(&s, [1, w, w, 2]).unwrap(), t(1, 1, 0));
        // (∞,x,y,z) -> (d(y,z) : d(z,x) : d(x,y))
        assert_eq!(crt(&s, [w, 0, 1, 3]).unwrap(), t(3, 4, 1));
        assert!(matches!(crt(&s, [0, 0, 0, 1]), Err(CrossRatioError::Inadmissible(_))));
        assert!(matches!(crt(&s, [0, 1, 2, 9]), Err(CrossRatioError::IndexOutOfRange(9))));
    }

    #[test]
    fn log_coordinates() {
        let l = t(1, 1, 1).to_log().unwrap();
        assert_eq!(l.0, [0.0, 0.0, 0.0]);
        let inf = f64::INFINITY;
        assert_eq!(t(1, 1, 0).to_log().unwrap().0, [inf, -inf, 0.0]);
        assert_eq!(t(1, 0, 1).to_log().unwrap().0, [-inf, 0.0, inf]);
        assert_eq!(t(0, 1, 1).to_log().unwrap().0, [0.0, inf, -inf]);
        let l = t(1, 3, 2).to_log().unwrap();
        let expect = [(1.5f64).ln(), 2f64.ln(), -(3f64.ln())];
        for i in 0..3 {
            assert!((l.0[i] - expect[i]).abs() < 1e-12);
        }
        assert!(l.sum().abs() < 1e-12);
        assert!(t(0, 0, 1).to_log().is_err());
        let back = l.from_log().unwrap();
        assert!(back.proj_distance(&t(1, 3, 2)) < 1e-12);
        assert_eq!(LogTriple([0.0, inf, -inf]).from_log().unwrap(), t(0, 1, 1));
        assert!(LogTriple([1.0, inf, -inf]).from_log().is_err());
    }

    #[test]
    fn huge_coordinates_have_finite_logs() {
        let big = BigInt::from(3u8).pow(2000);
        let p = ProjTriple::new([big.clone(), big.clone() * 2, big]).unwrap();
        let l = p.to_log().unwrap();
        assert!((l.0[0] - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn admissible_counting() {
        for n in 1..6 {
            let mut c = 0;
            for_each_admissible(n, |_| c += 1);
            assert_eq!(c, admissible_count(n));
        }
    }

    #[test]
    fn corner_margin_bounds() {
        let s = line(&[0, 1, 2, 4]);
        let m = corner_margin(&s);
        // only one 4-set: crt (1:3:2) gives 2/3
        assert_eq!(m.margin, ExtRational::ratio(2, 3));
        assert_eq!(m.quadruples, 1);
        let three = line(&[0, 1, 2]);
        assert!(corner_margin(&three).margin.is_inf());
        let e = three.extend_with_infinity().unwrap();
        // (∞,0,1,2) -> (1:2:1)
        assert_eq!(corner_margin(&e).margin, ExtRational::ratio(1, 2));
    }

    #[test]
    fn equivalence_under_transforms() {
        let s = line(&[0, 1, 3, 4, 9]);
        let id = identity_map(&s);
        assert!(moebius_equivalent(&s, &s, &id).unwrap());
        let r = s.rescale(&parse_rational("7/3").unwrap()).unwrap();
        assert!(moebius_equivalent(&s, &r, &id).unwrap());
        for o in 0..s.len() {
            assert!(moebius_equivalent(&s, &s.involute(o).unwrap(), &id).unwrap());
        }
        let other = line(&[0, 1, 3, 4, 10]);
        let mut f = id.clone();
        f.insert("9".into(), "10".into());
        let rep = moebius_equivalence(&s, &other, &f).unwrap();
        assert!(!rep.equivalent);
        assert!(rep.first_mismatch.is_some());
        let mut bad = id.clone();
        bad.insert("0".into(), "1".into());
        assert!(matches!(moebius_equivalent(&s, &s, &bad), Err(CrossRatioError::NotBijection(_))));
    }
}
