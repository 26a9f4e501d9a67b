//! Finite extended quasi-metric spaces with exact rational distances.
//!
//! A [`FiniteQSpace`] is a labeled point set with a symmetric distance
//! matrix over [`ExtRational`]. At most one point lies at infinity: its
//! distance to every other point is `INF` and all other distances are
//! finite and positive. The minimal constant `K >= 1` with
//! `d(x,y) <= K max(d(x,z), d(z,y))` is computed lazily and cached.

mod ext;
mod format;

use std::collections::HashMap;
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

pub use ext::{parse_rational, ArithError, ExtRational, ParseExtError};
pub use format::{ParseError, SpaceData};

/// Point subsets are bitsets indexed by point position.
pub type PointSet = FixedBitSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QSpaceError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("space violates the quasi-metric axioms: {}", .0.summary())]
    Invalid(ValidationReport),
    #[error("a space needs at least one point")]
    Empty,
    #[error("distance matrix is not {0}x{0}")]
    Shape(usize),
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(BigRational),
    #[error("point `{0}` is the point at infinity")]
    InfinityPoint(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("point index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("space already has a point at infinity (`{0}`)")]
    AlreadyExtended(String),
    #[error("points of the normalization triple must be mutually distinct")]
    NotDistinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `d(x,x) = 0`
    Diagonal,
    Symmetry,
    /// `d(x,y) > 0` for `x != y`
    Definiteness,
    /// More than one point sits at infinite distance from everything.
    UniqueInfinity,
    /// The declared point at infinity has a finite distance to some point.
    InfinityRow,
    /// Two ordinary points are at infinite distance.
    FiniteDistances,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub witness: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { ok: violations.is_empty(), violations }
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn summary(&self) -> String {
        match self.violations.first() {
            None => "ok".to_string(),
            Some(v) => format!(
                "{:?} at ({}): {} ({} violation(s) total)",
                v.rule,
                v.witness.join(", "),
                v.detail,
                self.violations.len()
            ),
        }
    }
}

/// Checks candidate data against every invariant of [`FiniteQSpace`].
pub fn validate(data: &SpaceData) -> ValidationReport {
    let n = data.points.len();
    check_axioms(&data.points, data.infinity_index(), |i, j| &data.dist[i][j], n)
}

fn check_axioms<'a>(
    labels: &[String],
    infinity: Option<usize>,
    d: impl Fn(usize, usize) -> &'a ExtRational,
    n: usize,
) -> ValidationReport {
    let mut out = Vec::new();
    let pair = |i: usize, j: usize| vec![labels[i].clone(), labels[j].clone()];
    for i in 0..n {
        if !d(i, i).is_zero() {
            out.push(Violation {
                rule: Rule::Diagonal,
                witness: vec![labels[i].clone()],
                detail: format!("d(x,x) = {}", d(i, i)),
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d(i, j) != d(j, i) {
                out.push(Violation {
                    rule: Rule::Symmetry,
                    witness: pair(i, j),
                    detail: format!("d(x,y) = {} but d(y,x) = {}", d(i, j), d(j, i)),
                });
            }
            if d(i, j).is_zero() || d(j, i).is_zero() {
                out.push(Violation {
                    rule: Rule::Definiteness,
                    witness: pair(i, j),
                    detail: "distinct points at distance 0".to_string(),
                });
            }
        }
    }
    let all_inf: Vec<usize> = (0..n)
        .filter(|&i| n > 1 && (0..n).all(|j| j == i || d(i, j).is_inf()))
        .collect();
    if all_inf.len() > 1 {
        out.push(Violation {
            rule: Rule::UniqueInfinity,
            witness: all_inf.iter().map(|&i| labels[i].clone()).collect(),
            detail: format!("{} points are at infinite distance from all others", all_inf.len()),
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let involves_inf = Some(i) == infinity || Some(j) == infinity;
            let entries = [d(i, j), d(j, i)];
            if involves_inf && entries.iter().any(|e| e.is_finite()) {
                out.push(Violation {
                    rule: Rule::InfinityRow,
                    witness: pair(i, j),
                    detail: "finite distance to the point at infinity".to_string(),
                });
            }
            if !involves_inf && entries.iter().any(|e| e.is_inf()) {
                out.push(Violation {
                    rule: Rule::FiniteDistances,
                    witness: pair(i, j),
                    detail: if infinity.is_none() {
                        "infinite distance but no point at infinity declared".to_string()
                    } else {
                        "infinite distance between ordinary points".to_string()
                    },
                });
            }
        }
    }
    ValidationReport::from_violations(out)
}

/// All finite distances multiplied by the lcm of their denominators.
#[derive(Debug, Clone)]
pub(crate) struct IntDistances {
    /// `None` marks `INF`.
    pub vals: Vec<Option<BigInt>>,
    /// Copy with `-1` for `INF`, present when every value is below `2^31`.
    pub small: Option<Vec<i64>>,
}

#[derive(Debug, Clone)]
pub struct FiniteQSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    dist: Vec<ExtRational>,
    infinity: Option<usize>,
    quasi: OnceLock<(BigRational, Option<[usize; 3]>)>,
    ints: OnceLock<IntDistances>,
}

impl PartialEq for FiniteQSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.dist == other.dist && self.infinity == other.infinity
    }
}

impl FiniteQSpace {
    /// Builds and validates a space. Unlike file input, fewer than three
    /// points are accepted so that subspaces can be represented.
    pub fn new(
        labels: Vec<String>,
        rows: Vec<Vec<ExtRational>>,
        infinity: Option<usize>,
    ) -> Result<Self, QSpaceError> {
        let n = labels.len();
        if n == 0 {
            return Err(QSpaceError::Empty);
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(QSpaceError::Shape(n));
        }
        if let Some(w) = infinity {
            if w >= n {
                return Err(QSpaceError::IndexOutOfRange(w));
            }
        }
        let dist: Vec<ExtRational> = rows.into_iter().flatten().collect();
        Self::from_flat(labels, dist, infinity)
    }

    /// Builds a space from a symmetric distance function evaluated on
    /// `i < j`.
    pub fn from_fn(
        labels: Vec<String>,
        infinity: Option<usize>,
        mut f: impl FnMut(usize, usize) -> ExtRational,
    ) -> Result<Self, QSpaceError> {
        let n = labels.len();
        if n == 0 {
            return Err(QSpaceError::Empty);
        }
        if let Some(w) = infinity {
            if w >= n {
                return Err(QSpaceError::IndexOutOfRange(w));
            }
        }
        let mut dist = vec![ExtRational::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                dist[i * n + j] = v.clone();
                dist[j * n + i] = v;
            }
        }
        Self::from_flat(labels, dist, infinity)
    }

    fn from_flat(
        labels: Vec<String>,
        dist: Vec<ExtRational>,
        infinity: Option<usize>,
    ) -> Result<Self, QSpaceError> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(QSpaceError::Parse(ParseError::DuplicateLabel(l.clone())));
            }
        }
        let report = check_axioms(&labels, infinity, |i, j| &dist[i * n + j], n);
        if !report.ok {
            return Err(QSpaceError::Invalid(report));
        }
        Ok(FiniteQSpace {
            labels,
            index,
            dist,
            infinity,
            quasi: OnceLock::new(),
            ints: OnceLock::new(),
        })
    }

    pub fn from_data(data: SpaceData) -> Result<Self, QSpaceError> {
        let infinity = data.infinity_index();
        Self::new(data.points, data.dist, infinity)
    }

    /// Parses, validates and builds a space from the JSON file format.
    pub fn from_json(text: &str) -> Result<Self, QSpaceError> {
        Self::from_data(SpaceData::from_json(text)?)
    }

    pub fn to_data(&self) -> SpaceData {
        let n = self.len();
        SpaceData {
            points: self.labels.clone(),
            infinity: self.infinity.map(|w| self.labels[w].clone()),
            dist: (0..n).map(|i| self.dist[i * n..(i + 1) * n].to_vec()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_data().to_json()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, QSpaceError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| QSpaceError::UnknownPoint(label.to_string()))
    }

    pub fn infinity(&self) -> Option<usize> {
        self.infinity
    }

    pub fn is_ordinary(&self, i: usize) -> bool {
        Some(i) != self.infinity
    }

    pub fn dist(&self, i: usize, j: usize) -> &ExtRational {
        &self.dist[i * self.len() + j]
    }

    /// Distance between two ordinary points. Panics if either is the point
    /// at infinity.
    pub fn fdist(&self, i: usize, j: usize) -> &BigRational {
        self.dist(i, j)
            .as_finite()
            .expect("finite distance requested for the point at infinity")
    }

    /// Indices of all points other than the point at infinity.
    pub fn ordinary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.is_ordinary(i))
    }

    pub fn ordinary_set(&self) -> PointSet {
        let mut s = PointSet::with_capacity(self.len());
        for i in self.ordinary() {
            s.insert(i);
        }
        s
    }

    pub fn empty_set(&self) -> PointSet {
        PointSet::with_capacity(self.len())
    }

    pub fn set_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<PointSet, QSpaceError> {
        let mut s = self.empty_set();
        for l in labels {
            s.insert(self.index_of(l.as_ref())?);
        }
        Ok(s)
    }

    pub fn set_labels(&self, set: &PointSet) -> Vec<String> {
        set.ones().map(|i| self.labels[i].clone()).collect()
    }

    /// Smallest positive distance between ordinary points.
    pub fn min_positive_distance(&self) -> Option<BigRational> {
        let pts: Vec<usize> = self.ordinary().collect();
        let mut best: Option<&BigRational> = None;
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                let v = self.fdist(i, j);
                if best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
        }
        best.cloned()
    }

    /// Largest distance between ordinary points (0 with fewer than two).
    pub fn finite_diameter(&self) -> BigRational {
        self.diameter(&self.ordinary_set())
            .into_finite()
            .expect("ordinary points have finite mutual distances")
    }

    /// Minimal `K >= 1` making `d` a `K`-quasi-metric on the ordinary
    /// points. Spaces with fewer than three ordinary points give `1`.
    pub fn quasi_constant(&self) -> &BigRational {
        &self.quasi_cache().0
    }

    /// A triple `(x, y, z)` attaining the quasi-constant, i.e.
    /// `d(x,y) = K max(d(x,z), d(z,y))`, when `K > 1`.
    pub fn quasi_witness(&self) -> Option<[usize; 3]> {
        self.quasi_cache().1
    }

    fn quasi_cache(&self) -> &(BigRational, Option<[usize; 3]>) {
        self.quasi.get_or_init(|| {
            let ints = self.int_distances();
            let n = self.len();
            let pts: Vec<usize> = self.ordinary().collect();
            let v = |i: usize, j: usize| ints.vals[i * n + j].as_ref().expect("ordinary pair");
            // best ratio num/den, starting at 1
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            let mut witness = None;
            for (a, &x) in pts.iter().enumerate() {
                for &y in &pts[a + 1..] {
                    let mut min_z: Option<(&BigInt, usize)> = None;
                    for &z in &pts {
                        if z == x || z == y {
                            continue;
                        }
                        let m = v(x, z).max(v(z, y));
                        if min_z.is_none_or(|(b, _)| m < b) {
                            min_z = Some((m, z));
                        }
                    }
                    if let Some((m, z)) = min_z {
                        let dxy = v(x, y);
                        let lhs = dxy * &den;
                        let rhs = &num * m;
                        // ties go to the longer pair
                        let better = lhs > rhs
                            || (lhs == rhs
                                && witness.is_some_and(|[a, b, _]: [usize; 3]| dxy > v(a, b)));
                        if better {
                            num = dxy.clone();
                            den = m.clone();
                            witness = Some([x, y, z]);
                        }
                    }
                }
            }
            (BigRational::new(num, den), witness)
        })
    }

    pub(crate) fn int_distances(&self) -> &IntDistances {
        self.ints.get_or_init(|| {
            let mut lcm = BigInt::one();
            for v in self.dist.iter().filter_map(ExtRational::as_finite) {
                lcm = lcm.lcm(v.denom());
            }
            let vals: Vec<Option<BigInt>> = self
                .dist
                .iter()
                .map(|e| e.as_finite().map(|v| v.numer() * (&lcm / v.denom())))
                .collect();
            let limit = BigInt::from(1u64 << 31);
            let small = vals
                .iter()
                .map(|v| match v {
                    None => Some(-1i64),
                    Some(b) if b < &limit => b.to_i64(),
                    Some(_) => None,
                })
                .collect::<Option<Vec<i64>>>();
            IntDistances { vals, small }
        })
    }

    /// Multiplies every finite distance by `lambda > 0`.
    pub fn rescale(&self, lambda: &BigRational) -> Result<Self, QSpaceError> {
        if !lambda.is_positive() {
            return Err(QSpaceError::NonPositiveScale(lambda.clone()));
        }
        let dist = self.dist.iter().map(|e| e.scale(lambda)).collect();
        let out = Self::from_flat(self.labels.clone(), dist, self.infinity)?;
        if let Some(k) = self.quasi.get() {
            let _ = out.quasi.set(k.clone());
        }
        Ok(out)
    }

    /// The involution at `o`:
    ///
    /// * `d_o(x,y) = d(x,y) / (d(x,o) d(o,y))` for ordinary `x != y`,
    /// * `d_o(∞,y) = 1 / d(o,y)`,
    /// * `o` becomes the point at infinity.
    pub fn involute(&self, o: usize) -> Result<Self, QSpaceError> {
        let n = self.len();
        if o >= n {
            return Err(QSpaceError::IndexOutOfRange(o));
        }
        if Some(o) == self.infinity {
            return Err(QSpaceError::InfinityPoint(self.labels[o].clone()));
        }
        let d_o = |i: usize, j: usize| -> ExtRational {
            if i == o || j == o {
                return ExtRational::INF;
            }
            let old_inf = self.infinity;
            if Some(i) == old_inf {
                return ExtRational::finite_unchecked(self.fdist(o, j).recip());
            }
            if Some(j) == old_inf {
                return ExtRational::finite_unchecked(self.fdist(i, o).recip());
            }
            let denom = self.fdist(i, o) * self.fdist(o, j);
            ExtRational::finite_unchecked(self.fdist(i, j) / denom)
        };
        Self::from_fn(self.labels.clone(), Some(o), d_o)
    }

    pub fn involute_at(&self, label: &str) -> Result<Self, QSpaceError> {
        self.involute(self.index_of(label)?)
    }

    /// Adds a point at infinity labeled `inf` (or `inf1`, `inf2`, … if
    /// taken).
    pub fn extend_with_infinity(&self) -> Result<Self, QSpaceError> {
        if let Some(w) = self.infinity {
            return Err(QSpaceError::AlreadyExtended(self.labels[w].clone()));
        }
        let mut label = "inf".to_string();
        let mut k = 0;
        while self.index.contains_key(&label) {
            k += 1;
            label = format!("inf{k}");
        }
        let n = self.len();
        let mut labels = self.labels.clone();
        labels.push(label);
        let out = Self::from_fn(labels, Some(n), |i, j| {
            if j == n {
                ExtRational::INF
            } else {
                self.dist(i, j).clone()
            }
        })?;
        if let Some(k) = self.quasi.get() {
            let _ = out.quasi.set(k.clone());
        }
        Ok(out)
    }

    /// The representative `d_A` for `A = (ω, α, β)`:
    /// `d_A(x,y) = d(x,y)/(d(x,ω) d(ω,y)) · d(α,ω) d(ω,β)/d(α,β)`, with
    /// infinite distances cancelling pairwise. `ω` is the point at infinity
    /// of the result and `d_A(α,β) = 1`.
    pub fn normalize_da(&self, omega: usize, alpha: usize, beta: usize) -> Result<Self, QSpaceError> {
        let n = self.len();
        for p in [omega, alpha, beta] {
            if p >= n {
                return Err(QSpaceError::IndexOutOfRange(p));
            }
        }
        if omega == alpha || omega == beta || alpha == beta {
            return Err(QSpaceError::NotDistinct);
        }
        if Some(omega) == self.infinity {
            // d(x,ω) d(ω,y) and d(α,ω) d(ω,β) cancel
            return self.rescale(&self.fdist(alpha, beta).recip());
        }
        let factor = if Some(alpha) == self.infinity {
            self.fdist(omega, beta).clone()
        } else if Some(beta) == self.infinity {
            self.fdist(alpha, omega).clone()
        } else {
            self.fdist(alpha, omega) * self.fdist(omega, beta) / self.fdist(alpha, beta)
        };
        self.involute(omega)?.rescale(&factor)
    }

    /// Closed ball `{y : d(x,y) <= r}` around an ordinary point.
    pub fn ball(&self, x: usize, r: &ExtRational) -> PointSet {
        let mut s = self.empty_set();
        for y in 0..self.len() {
            if self.dist(x, y) <= r {
                s.insert(y);
            }
        }
        s
    }

    /// Largest pairwise distance in `set` (0 for empty sets and singletons).
    pub fn diameter(&self, set: &PointSet) -> ExtRational {
        let pts: Vec<usize> = set.ones().collect();
        let mut best = ExtRational::zero();
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                let d = self.dist(i, j);
                if d > &best {
                    best = d.clone();
                }
            }
        }
        best
    }

    /// Smallest distance between the two sets (`INF` if either is empty).
    pub fn set_distance(&self, a: &PointSet, b: &PointSet) -> ExtRational {
        let mut best = ExtRational::INF;
        for i in a.ones() {
            for j in b.ones() {
                let d = self.dist(i, j);
                if d < &best {
                    best = d.clone();
                }
            }
        }
        best
    }

    /// The subspace on `keep`, preserving point order and labels.
    pub fn restrict(&self, keep: &PointSet) -> Result<Self, QSpaceError> {
        let idx: Vec<usize> = keep.ones().filter(|&i| i < self.len()).collect();
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let infinity = self.infinity.and_then(|w| idx.iter().position(|&i| i == w));
        Self::from_fn(labels, infinity, |a, b| self.dist(idx[a], idx[b]).clone())
    }

    /// The same space with points listed in `order` (a permutation of
    /// `0..len`).
    pub fn reordered(&self, order: &[usize]) -> Result<Self, QSpaceError> {
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let infinity = self.infinity.and_then(|w| order.iter().position(|&i| i == w));
        Self::from_fn(labels, infinity, |a, b| self.dist(order[a], order[b]).clone())
    }

    /// The same space with every label replaced by `f(label)`.
    pub fn relabeled(&self, f: impl Fn(&str) -> String) -> Result<Self, QSpaceError> {
        let labels = self.labels.iter().map(|l| f(l)).collect();
        Self::from_flat(labels, self.dist.clone(), self.infinity)
    }

    /// Whether the triangle inequality holds on all ordinary triples.
    pub fn is_metric(&self) -> bool {
        let pts: Vec<usize> = self.ordinary().collect();
        pts.iter().all(|&x| {
            pts.iter().all(|&y| {
                pts.iter()
                    .all(|&z| self.fdist(x, y) <= &(self.fdist(x, z) + self.fdist(z, y)))
            })
        })
    }
}

/// Convenience for tests and generators: points on the real line with
/// Euclidean distances, labeled by their value.
pub fn line_space(points: &[BigRational]) -> Result<FiniteQSpace, QSpaceError> {
    let labels = points.iter().map(ToString::to_string).collect();
    FiniteQSpace::from_fn(labels, None, |i, j| {
        ExtRational::finite_unchecked((&points[i] - &points[j]).abs())
    })
}
